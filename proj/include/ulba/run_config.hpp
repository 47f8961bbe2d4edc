#pragma once

#include "ulba/erosion.hpp"
#include "ulba/experiments.hpp"
#include "ulba/interval_optimizer.hpp"
#include "ulba/model.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ulba {

/// Flat `[section] key = value` configuration with a fixed set of known keys.
/// Values given in a file or through set() are tracked separately from the
/// built-in defaults so the resolved view can tell them apart.
class RunConfig {
public:
  RunConfig();

  /// Parses an INI file. Unknown sections or keys throw ConfigError with the
  /// path and the offending key.
  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_string(std::string_view text, std::string_view origin = "<string>");

  /// `section.key`, must be a known key.
  void set(std::string_view dotted_key, std::string value);
  /// Parses `section.key=value`.
  void apply_override(std::string_view assignment);

  bool is_set(std::string_view dotted_key) const;
  bool has_value(std::string_view dotted_key) const;

  std::string get_string(std::string_view dotted_key) const;
  std::int64_t get_int(std::string_view dotted_key) const;
  std::uint64_t get_u64(std::string_view dotted_key) const;
  double get_double(std::string_view dotted_key) const;
  bool get_bool(std::string_view dotted_key) const;
  std::vector<double> get_double_list(std::string_view dotted_key) const;
  std::vector<int> get_int_list(std::string_view dotted_key) const;

  /// Explicit values over defaults, keys without any value left out.
  std::map<std::string, std::string> resolved() const;
  /// Same, restricted to the given sections.
  std::map<std::string, std::string> resolved(const std::vector<std::string>& sections) const;

  const std::string& origin() const { return origin_; }

private:
  std::string origin_ = "<defaults>";
  std::map<std::string, std::string, std::less<>> values_;
};

/// Run seed: `flag` when given, else the file's run.seed, else `env_seed`
/// (LBA_SEED), else the built-in default. Stores the result in run.seed.
std::uint64_t resolve_seed(RunConfig& config, std::optional<std::uint64_t> flag,
                           const char* env_seed);

AppInstance instance_from(const RunConfig& config);
Policy instance_policy(const RunConfig& config);
TotalTimeOptions time_options_from(const RunConfig& config);
AnnealParams anneal_params_from(const RunConfig& config, std::uint64_t seed);
SamplingSpec sampling_from(const RunConfig& config, std::uint64_t seed);
ErosionConfig erosion_from(const RunConfig& config);
/// `count` consecutive seeds starting at `seed`.
std::vector<std::uint64_t> seed_range(std::uint64_t seed, std::int64_t count);

} // namespace ulba
