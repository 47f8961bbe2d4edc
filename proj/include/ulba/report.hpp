#pragma once

#include "ulba/erosion.hpp"
#include "ulba/experiments.hpp"
#include "ulba/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace ulba {

/// Shortest text that reads back to the same double, '.' decimal.
std::string format_number(double value);

/// Header `interval,first_iteration,end_iteration,length,modeled_time_s`.
std::string schedule_csv(const AppInstance& inst, Policy policy, const LBSchedule& schedule,
                         TotalTimeOptions options = {});

/// Header `id,P,N,alpha,anneal_time_s,sigma_plus_time_s,gain_pct`.
std::string bound_vs_anneal_csv(const BoundVsAnneal& result, const SamplingSpec& spec);

/// Header `fraction,id,P,N,standard_time_s,ulba_time_s,gain_pct,best_alpha`.
std::string gain_vs_overload_csv(const GainVsOverload& result, const SamplingSpec& spec);

/// Header `fraction,min,q1,median,q3,max,mean,mean_best_alpha`.
std::string overload_cells_csv(const GainVsOverload& result);

/// Header `iteration,modeled_time_s,avg_pe_usage_pct,lb_fired,migrated_weight`.
std::string simulation_csv(const SimResult& result);

/// Header `alpha,median_total_time_s,median_lb_calls,mean_pe_usage_pct`.
std::string alpha_sweep_csv(const AlphaSweep& result);

/// Header `P,strong,standard_time_s,ulba_time_s,gain_pct,standard_lb_calls,
/// ulba_lb_calls,standard_usage_pct,ulba_usage_pct`.
std::string compare_csv(std::span<const CompareRow> rows);

nlohmann::ordered_json summary_json(const Summary& s);
nlohmann::ordered_json lb_events_json(const SimResult& result);

/// Manifest skeleton: experiment name, seed and the resolved configuration.
nlohmann::ordered_json manifest(std::string_view experiment, std::uint64_t seed,
                                const std::map<std::string, std::string>& config);

struct OutputPaths {
  std::filesystem::path csv;
  std::filesystem::path json;
};

/// Writes `<dir>/<name>_<seed>.csv` and `.json`, creating `dir` if needed.
/// Throws ConfigError on I/O failure.
OutputPaths write_outputs(const std::filesystem::path& dir, std::string_view name,
                          std::uint64_t seed, std::string_view csv,
                          const nlohmann::ordered_json& manifest);

/// Writes `<dir>/<name>_<seed>.csv` only.
std::filesystem::path write_csv(const std::filesystem::path& dir, std::string_view name,
                                std::uint64_t seed, std::string_view csv);

} // namespace ulba
