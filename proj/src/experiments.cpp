#include "ulba/experiments.hpp"

#include "ulba/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ulba {

namespace {

void require(bool ok, const char* what) {
  if (!ok) {
    throw ConfigError(std::string("invalid sampling spec: ") + what);
  }
}

double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) {
    return lo;
  }
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

} // namespace

void validate(const SamplingSpec& s) {
  require(!s.pe_choices.empty(), "pe_choices not empty");
  for (const int p : s.pe_choices) {
    require(p >= 2, "every P choice >= 2");
  }
  require(0 < s.overload_min && s.overload_min <= s.overload_max && s.overload_max < 1,
          "0 < v_min <= v_max < 1");
  require(!s.overload_fraction || (*s.overload_fraction > 0 && *s.overload_fraction < 1),
          "overloading fraction in (0, 1)");
  require(s.iterations >= 1, "gamma >= 1");
  require(0 < s.work_min && s.work_min <= s.work_max, "0 < w_min <= w_max");
  require(0 < s.growth_min && s.growth_min <= s.growth_max, "0 < x_min <= x_max");
  require(0 <= s.skew_min && s.skew_min <= s.skew_max && s.skew_max <= 1,
          "0 <= y_min <= y_max <= 1");
  require(0 <= s.alpha_min && s.alpha_min <= s.alpha_max && s.alpha_max <= 1,
          "0 <= alpha_min <= alpha_max <= 1");
  require(!s.alpha || (*s.alpha >= 0 && *s.alpha <= 1), "alpha in [0, 1]");
  require(0 <= s.cost_min && s.cost_min <= s.cost_max, "0 <= z_min <= z_max");
  require(s.pe_speed > 0, "omega > 0");
  require(s.count >= 1, "count >= 1");
}

AppInstance sample_instance(const SamplingSpec& spec, Rng& rng) {
  AppInstance inst;
  std::uniform_int_distribution<std::size_t> choose(0, spec.pe_choices.size() - 1);
  inst.pe_count = spec.pe_choices[choose(rng)];
  const int pes = inst.pe_count;

  // Redraw v until round(P*v) leaves at least one overloading PE.
  for (int attempt = 0;; ++attempt) {
    const double v = spec.overload_fraction
                         ? *spec.overload_fraction
                         : uniform(rng, spec.overload_min, spec.overload_max);
    const auto n = static_cast<int>(std::lround(pes * v));
    if (n >= 1 && n < pes) {
      inst.overloading_count = n;
      break;
    }
    if (spec.overload_fraction || attempt > 1000) {
      inst.overloading_count = std::clamp(n, 1, pes - 1);
      break;
    }
  }

  inst.iterations = spec.iterations;
  inst.initial_workload = uniform(rng, spec.work_min, spec.work_max) * pes;
  const double per_pe = inst.initial_workload / pes;
  const double delta = per_pe * uniform(rng, spec.growth_min, spec.growth_max);
  const double y = uniform(rng, spec.skew_min, spec.skew_max);
  inst.uniform_growth = delta / pes * (1.0 - y);
  inst.extra_growth = delta / inst.overloading_count * y;
  const double alpha = uniform(rng, spec.alpha_min, spec.alpha_max);
  inst.alpha = spec.alpha ? *spec.alpha : alpha;
  inst.pe_speed = spec.pe_speed;
  inst.lb_cost = per_pe * uniform(rng, spec.cost_min, spec.cost_max) / spec.pe_speed;
  return inst;
}

AppInstance sample_instance(const SamplingSpec& spec, std::uint64_t id) {
  Rng rng = child_rng(spec.seed, id);
  return sample_instance(spec, rng);
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

} // namespace

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) {
    return s;
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  return s;
}

double median(std::span<const double> values) {
  return summarize(values).median;
}

Histogram histogram(std::span<const double> values, double bin_width) {
  Histogram h;
  h.bin_width = bin_width;
  if (values.empty()) {
    return h;
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  h.lower = std::floor(*lo / bin_width) * bin_width;
  const auto bins = static_cast<std::size_t>(std::floor((*hi - h.lower) / bin_width)) + 1;
  h.counts.assign(bins, 0);
  for (const double v : values) {
    const auto b = std::min(bins - 1, static_cast<std::size_t>(std::floor((v - h.lower) / bin_width)));
    ++h.counts[b];
  }
  return h;
}

BoundVsAnneal exp_bound_vs_anneal(const SamplingSpec& spec, const AnnealParams& params,
                                  int jobs) {
  validate(spec);
  validate(params);
  BoundVsAnneal out;
  out.records = parallel_map(static_cast<std::size_t>(spec.count), jobs, [&](std::size_t id) {
    const AppInstance inst = sample_instance(spec, id);
    AnnealParams local = params;
    local.seed = child_rng(params.seed, id)();
    const double bound = total_time(inst, Policy::ulba, sigma_plus_schedule(inst));
    const ScheduleResult annealed = anneal(inst, Policy::ulba, local);
    return GainRecord{id, annealed.energy, bound, relative_gain(annealed.energy, bound),
                      inst.alpha};
  });
  std::vector<double> gains;
  for (const auto& r : out.records) {
    gains.push_back(r.gain);
  }
  out.gain = summarize(gains);
  out.distribution = histogram(gains, 0.25);
  return out;
}

std::vector<double> alpha_grid(int size) {
  if (size < 1) {
    throw ConfigError("alpha grid needs at least one value");
  }
  if (size == 1) {
    return {0.0};
  }
  std::vector<double> grid(static_cast<std::size_t>(size));
  for (int k = 0; k < size; ++k) {
    grid[static_cast<std::size_t>(k)] = static_cast<double>(k) / (size - 1);
  }
  return grid;
}

GainVsOverload exp_gain_vs_overload(std::span<const double> fractions, int alpha_grid_size,
                                    const SamplingSpec& spec, int jobs) {
  validate(spec);
  for (const double f : fractions) {
    if (!(f > 0 && f < 0.5)) {
      throw ConfigError("overloading fractions must lie in (0, 0.5)");
    }
  }
  const std::vector<double> alphas = alpha_grid(alpha_grid_size);
  const auto per_cell = static_cast<std::size_t>(spec.count);

  GainVsOverload out;
  for (std::size_t cell = 0; cell < fractions.size(); ++cell) {
    SamplingSpec cell_spec = spec;
    cell_spec.overload_fraction = fractions[cell];
    cell_spec.alpha = 0.0;
    auto records = parallel_map(per_cell, jobs, [&](std::size_t k) {
      const std::uint64_t id = cell * per_cell + k;
      AppInstance inst = sample_instance(cell_spec, id);
      const double standard = total_time(inst, Policy::standard, sigma_plus_schedule(inst));
      double best = std::numeric_limits<double>::infinity();
      double best_alpha = 0.0;
      for (const double a : alphas) {
        inst.alpha = a;
        const double t = total_time(inst, Policy::ulba, sigma_plus_schedule(inst));
        if (t < best) {
          best = t;
          best_alpha = a;
        }
      }
      return GainRecord{id, standard, best, relative_gain(standard, best), best_alpha};
    });

    std::vector<double> gains;
    double alpha_sum = 0.0;
    for (const auto& r : records) {
      gains.push_back(r.gain);
      alpha_sum += r.alpha;
    }
    out.cells.push_back({fractions[cell], summarize(gains),
                         alpha_sum / static_cast<double>(records.size())});
    out.records.push_back(std::move(records));
  }
  return out;
}

AlphaSweep exp_alpha_sweep(const ErosionConfig& config, std::span<const double> alphas,
                           std::span<const std::uint64_t> seeds, int jobs) {
  validate(config);
  for (const double a : alphas) {
    if (!(a >= 0 && a <= 1)) {
      throw ConfigError("alpha grid values must lie in [0, 1]");
    }
  }
  if (seeds.empty()) {
    throw ConfigError("alpha sweep needs at least one seed");
  }
  // Task 0..S-1: standard runs; then one task per (alpha, seed).
  const std::size_t s = seeds.size();
  const auto runs = parallel_map(s * (alphas.size() + 1), jobs, [&](std::size_t task) {
    const std::uint64_t seed = seeds[task % s];
    if (task < s) {
      return run_simulation(config, Policy::standard, 0.0, seed);
    }
    return run_simulation(config, Policy::ulba, alphas[task / s - 1], seed);
  });

  AlphaSweep out;
  std::vector<double> standard;
  for (std::size_t k = 0; k < s; ++k) {
    standard.push_back(runs[k].total_time);
  }
  out.standard_median_total_time = median(standard);
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    std::vector<double> times, calls;
    double usage = 0.0;
    for (std::size_t k = 0; k < s; ++k) {
      const SimResult& r = runs[(a + 1) * s + k];
      times.push_back(r.total_time);
      calls.push_back(static_cast<double>(r.lb_calls()));
      usage += r.mean_pe_usage;
    }
    out.rows.push_back({alphas[a], median(times), median(calls), usage / static_cast<double>(s)});
  }
  return out;
}

std::vector<CompareRow> exp_sim_compare(const ErosionConfig& base,
                                        std::span<const int> pe_counts,
                                        std::span<const int> strong_counts, double alpha,
                                        std::span<const std::uint64_t> seeds, int jobs) {
  if (seeds.empty()) {
    throw ConfigError("comparison needs at least one seed");
  }
  std::vector<ErosionConfig> configs;
  for (const int p : pe_counts) {
    for (const int strong : strong_counts) {
      ErosionConfig c = base;
      c.pe_count = p;
      c.strong_count = strong;
      validate(c);
      configs.push_back(c);
    }
  }
  struct Pair {
    SimResult standard;
    SimResult ulba;
  };
  const std::size_t s = seeds.size();
  const auto runs = parallel_map(configs.size() * s, jobs, [&](std::size_t task) {
    const ErosionConfig& c = configs[task / s];
    const std::uint64_t seed = seeds[task % s];
    return Pair{run_simulation(c, Policy::standard, 0.0, seed),
                run_simulation(c, Policy::ulba, alpha, seed)};
  });

  std::vector<CompareRow> rows;
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    std::vector<double> ts, tu, ls, lu;
    double us = 0.0;
    double uu = 0.0;
    for (std::size_t k = 0; k < s; ++k) {
      const Pair& pr = runs[ci * s + k];
      ts.push_back(pr.standard.total_time);
      tu.push_back(pr.ulba.total_time);
      ls.push_back(static_cast<double>(pr.standard.lb_calls()));
      lu.push_back(static_cast<double>(pr.ulba.lb_calls()));
      us += pr.standard.mean_pe_usage;
      uu += pr.ulba.mean_pe_usage;
    }
    CompareRow row;
    row.pe_count = configs[ci].pe_count;
    row.strong_count = configs[ci].strong_count;
    row.standard_time = median(ts);
    row.ulba_time = median(tu);
    row.gain = relative_gain(row.standard_time, row.ulba_time);
    row.standard_lb_calls = median(ls);
    row.ulba_lb_calls = median(lu);
    row.standard_usage = us / static_cast<double>(s);
    row.ulba_usage = uu / static_cast<double>(s);
    rows.push_back(row);
  }
  return rows;
}

} // namespace ulba
