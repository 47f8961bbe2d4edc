#pragma once

#include "ulba/erosion.hpp"
#include "ulba/interval_optimizer.hpp"
#include "ulba/model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ulba {

/// Random application parameters.
///
///   P      uniform over pe_choices
///   N      round(P*v), v ~ U(overload_min, overload_max), or v fixed
///   W(0)   U(work_min, work_max) * P
///   dW     W(0)/P * x,   x ~ U(growth_min, growth_max)
///   a      dW/P * (1-y), y ~ U(skew_min, skew_max)
///   m      dW/N * y
///   alpha  U(alpha_min, alpha_max), or fixed
///   C      W(0)/P * z / omega, z ~ U(cost_min, cost_max)
struct SamplingSpec {
  std::vector<int> pe_choices{256, 512, 1024, 2048};
  double overload_min = 0.01;
  double overload_max = 0.2;
  std::optional<double> overload_fraction;
  Iteration iterations = 100;
  double work_min = 52e7;
  double work_max = 1165e7;
  double growth_min = 0.01;
  double growth_max = 0.3;
  double skew_min = 0.8;
  double skew_max = 1.0;
  double alpha_min = 0.0;
  double alpha_max = 1.0;
  std::optional<double> alpha;
  double cost_min = 0.1;
  double cost_max = 3.0;
  double pe_speed = 1e9;
  std::uint64_t seed = 1;
  int count = 100;
};

void validate(const SamplingSpec& spec);

AppInstance sample_instance(const SamplingSpec& spec, Rng& rng);

/// Instance `id` of the run: drawn from child_rng(spec.seed, id).
AppInstance sample_instance(const SamplingSpec& spec, std::uint64_t id);

struct Summary {
  std::size_t count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

/// Quartiles by linear interpolation between order statistics.
Summary summarize(std::span<const double> values);

double median(std::span<const double> values);

struct Histogram {
  double lower = 0.0;
  double bin_width = 1.0;
  std::vector<int> counts;
};

/// Bins aligned on multiples of `bin_width` covering [min, max].
Histogram histogram(std::span<const double> values, double bin_width);

struct GainRecord {
  std::uint64_t id = 0;
  double baseline = 0.0;
  double test = 0.0;
  double gain = 0.0; // relative_gain(baseline, test)
  double alpha = 0.0;
};

struct BoundVsAnneal {
  /// baseline = annealed energy, test = sigma+ schedule energy. The gain is
  /// negative when the sigma+ schedule is slower than the annealed one.
  std::vector<GainRecord> records;
  Summary gain;
  Histogram distribution;
};

/// Compares the sigma+ schedule with an annealed schedule (ULBA policy with
/// each instance's own alpha) over spec.count sampled instances.
BoundVsAnneal exp_bound_vs_anneal(const SamplingSpec& spec, const AnnealParams& params,
                                  int jobs = 1);

/// `size` alphas evenly spaced on [0, 1], both ends included.
std::vector<double> alpha_grid(int size);

struct OverloadCell {
  double fraction = 0.0;
  Summary gain;
  double mean_best_alpha = 0.0;
};

struct GainVsOverload {
  /// baseline = standard time, test = best ULBA time, alpha = its argmin.
  std::vector<std::vector<GainRecord>> records; // [fraction][instance]
  std::vector<OverloadCell> cells;
};

/// For each overloading fraction, samples spec.count instances and compares
/// the standard method on its own sigma+ schedule (alpha = 0) with the best
/// ULBA time over `alpha_grid_size` alphas, each on its own sigma+ schedule.
GainVsOverload exp_gain_vs_overload(std::span<const double> fractions, int alpha_grid_size,
                                    const SamplingSpec& spec, int jobs = 1);

struct AlphaSweepRow {
  double alpha = 0.0;
  double median_total_time = 0.0;
  double median_lb_calls = 0.0;
  double mean_pe_usage = 0.0;
};

struct AlphaSweep {
  std::vector<AlphaSweepRow> rows;
  double standard_median_total_time = 0.0;
};

AlphaSweep exp_alpha_sweep(const ErosionConfig& config, std::span<const double> alphas,
                           std::span<const std::uint64_t> seeds, int jobs = 1);

struct CompareRow {
  int pe_count = 0;
  int strong_count = 0;
  double standard_time = 0.0; // medians over seeds
  double ulba_time = 0.0;
  double gain = 0.0;
  double standard_lb_calls = 0.0;
  double ulba_lb_calls = 0.0;
  double standard_usage = 0.0; // mean over seeds
  double ulba_usage = 0.0;
};

/// Standard vs ULBA(alpha) for every (P, strong) pair on top of `base`.
std::vector<CompareRow> exp_sim_compare(const ErosionConfig& base,
                                        std::span<const int> pe_counts,
                                        std::span<const int> strong_counts, double alpha,
                                        std::span<const std::uint64_t> seeds, int jobs = 1);

} // namespace ulba
