#include "ulba/report.hpp"

#include <fmt/format.h>

#include <fstream>
#include <iterator>

namespace ulba {

std::string format_number(double value) {
  return fmt::format("{}", value);
}

std::string schedule_csv(const AppInstance& inst, Policy policy, const LBSchedule& schedule,
                         TotalTimeOptions options) {
  std::string out = "interval,first_iteration,end_iteration,length,modeled_time_s\n";
  auto it = std::back_inserter(out);
  for (std::size_t k = 0; k < schedule.interval_count(); ++k) {
    const Iteration begin = schedule.calls()[k];
    const Iteration end = schedule.interval_end(k);
    double time = interval_time(inst, policy, begin, end);
    if (k == 0 && options.free_initial_balance) {
      time -= inst.lb_cost;
    }
    fmt::format_to(it, "{},{},{},{},{}\n", k, begin, end, end - begin, format_number(time));
  }
  return out;
}

std::string bound_vs_anneal_csv(const BoundVsAnneal& result, const SamplingSpec& spec) {
  std::string out = "id,P,N,alpha,anneal_time_s,sigma_plus_time_s,gain_pct\n";
  auto it = std::back_inserter(out);
  for (const auto& r : result.records) {
    const AppInstance inst = sample_instance(spec, r.id);
    fmt::format_to(it, "{},{},{},{},{},{},{}\n", r.id, inst.pe_count, inst.overloading_count,
                   format_number(r.alpha), format_number(r.baseline), format_number(r.test),
                   format_number(r.gain));
  }
  return out;
}

std::string gain_vs_overload_csv(const GainVsOverload& result, const SamplingSpec& spec) {
  std::string out = "fraction,id,P,N,standard_time_s,ulba_time_s,gain_pct,best_alpha\n";
  auto it = std::back_inserter(out);
  for (std::size_t cell = 0; cell < result.cells.size(); ++cell) {
    SamplingSpec cell_spec = spec;
    cell_spec.overload_fraction = result.cells[cell].fraction;
    cell_spec.alpha = 0.0;
    for (const auto& r : result.records[cell]) {
      const AppInstance inst = sample_instance(cell_spec, r.id);
      fmt::format_to(it, "{},{},{},{},{},{},{},{}\n", format_number(result.cells[cell].fraction),
                     r.id, inst.pe_count, inst.overloading_count, format_number(r.baseline),
                     format_number(r.test), format_number(r.gain), format_number(r.alpha));
    }
  }
  return out;
}

std::string overload_cells_csv(const GainVsOverload& result) {
  std::string out = "fraction,min,q1,median,q3,max,mean,mean_best_alpha\n";
  auto it = std::back_inserter(out);
  for (const auto& c : result.cells) {
    fmt::format_to(it, "{},{},{},{},{},{},{},{}\n", format_number(c.fraction),
                   format_number(c.gain.min), format_number(c.gain.q1),
                   format_number(c.gain.median), format_number(c.gain.q3),
                   format_number(c.gain.max), format_number(c.gain.mean),
                   format_number(c.mean_best_alpha));
  }
  return out;
}

std::string simulation_csv(const SimResult& result) {
  std::string out = "iteration,modeled_time_s,avg_pe_usage_pct,lb_fired,migrated_weight\n";
  auto it = std::back_inserter(out);
  for (const auto& r : result.iterations) {
    fmt::format_to(it, "{},{},{},{},{}\n", r.iteration, format_number(r.time),
                   format_number(r.pe_usage), r.lb_fired ? 1 : 0, r.migrated);
  }
  return out;
}

std::string alpha_sweep_csv(const AlphaSweep& result) {
  std::string out = "alpha,median_total_time_s,median_lb_calls,mean_pe_usage_pct\n";
  auto it = std::back_inserter(out);
  for (const auto& r : result.rows) {
    fmt::format_to(it, "{},{},{},{}\n", format_number(r.alpha),
                   format_number(r.median_total_time), format_number(r.median_lb_calls),
                   format_number(r.mean_pe_usage));
  }
  return out;
}

std::string compare_csv(std::span<const CompareRow> rows) {
  std::string out =
      "P,strong,standard_time_s,ulba_time_s,gain_pct,standard_lb_calls,ulba_lb_calls,"
      "standard_usage_pct,ulba_usage_pct\n";
  auto it = std::back_inserter(out);
  for (const auto& r : rows) {
    fmt::format_to(it, "{},{},{},{},{},{},{},{},{}\n", r.pe_count, r.strong_count,
                   format_number(r.standard_time), format_number(r.ulba_time),
                   format_number(r.gain), format_number(r.standard_lb_calls),
                   format_number(r.ulba_lb_calls), format_number(r.standard_usage),
                   format_number(r.ulba_usage));
  }
  return out;
}

nlohmann::ordered_json summary_json(const Summary& s) {
  return {{"count", s.count}, {"min", s.min},   {"q1", s.q1},    {"median", s.median},
          {"q3", s.q3},       {"max", s.max},   {"mean", s.mean}};
}

nlohmann::ordered_json lb_events_json(const SimResult& result) {
  auto events = nlohmann::ordered_json::array();
  for (const auto& e : result.lb_events) {
    events.push_back({{"iteration", e.iteration},
                      {"mode", std::string(to_string(e.mode))},
                      {"alphas", e.alphas},
                      {"migrated_weight", e.migrated},
                      {"cost_s", e.cost}});
  }
  return events;
}

nlohmann::ordered_json manifest(std::string_view experiment, std::uint64_t seed,
                                const std::map<std::string, std::string>& config) {
  nlohmann::ordered_json m;
  m["experiment"] = std::string(experiment);
  m["seed"] = seed;
  m["config"] = config;
  return m;
}

namespace {

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) {
    throw ConfigError("cannot write " + path.string());
  }
}

std::filesystem::path stem_path(const std::filesystem::path& dir, std::string_view name,
                                std::uint64_t seed, std::string_view extension) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  }
  return dir / fmt::format("{}_{}.{}", name, seed, extension);
}

} // namespace

std::filesystem::path write_csv(const std::filesystem::path& dir, std::string_view name,
                                std::uint64_t seed, std::string_view csv) {
  const auto path = stem_path(dir, name, seed, "csv");
  write_file(path, csv);
  return path;
}

OutputPaths write_outputs(const std::filesystem::path& dir, std::string_view name,
                          std::uint64_t seed, std::string_view csv,
                          const nlohmann::ordered_json& manifest) {
  OutputPaths paths;
  paths.csv = write_csv(dir, name, seed, csv);
  paths.json = stem_path(dir, name, seed, "json");
  write_file(paths.json, manifest.dump(2) + "\n");
  return paths;
}

} // namespace ulba
