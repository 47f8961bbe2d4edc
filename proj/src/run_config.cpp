#include "ulba/run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace ulba {

namespace {

struct KeySpec {
  std::string_view key;
  std::optional<std::string_view> fallback; // nullopt: required when used
};

// clang-format off
constexpr KeySpec kKeys[] = {
    {"run.seed", "1"},
    {"run.out", "out"},
    {"run.jobs", "1"},

    {"instance.P", std::nullopt},
    {"instance.N", std::nullopt},
    {"instance.gamma", "100"},
    {"instance.w0", std::nullopt},
    {"instance.a", std::nullopt},
    {"instance.m", std::nullopt},
    {"instance.alpha", "0"},
    {"instance.omega", "1"},
    {"instance.C", std::nullopt},
    {"instance.policy", "ulba"},
    {"instance.free_initial_balance", "false"},

    {"anneal.initial_temperature", "0.01"},
    {"anneal.final_temperature", "1e-06"},
    {"anneal.steps", "1000"},
    {"anneal.moves_per_temperature", "100"},

    {"sampling.P_choices", "256,512,1024,2048"},
    {"sampling.overload_min", "0.01"},
    {"sampling.overload_max", "0.2"},
    {"sampling.gamma", "100"},
    {"sampling.work_min", "520000000"},
    {"sampling.work_max", "11650000000"},
    {"sampling.growth_min", "0.01"},
    {"sampling.growth_max", "0.3"},
    {"sampling.skew_min", "0.8"},
    {"sampling.skew_max", "1"},
    {"sampling.alpha_min", "0"},
    {"sampling.alpha_max", "1"},
    {"sampling.alpha", std::nullopt},
    {"sampling.cost_min", "0.1"},
    {"sampling.cost_max", "3"},
    {"sampling.omega", "1000000000"},
    {"sampling.count", "100"},
    {"sampling.fractions", "0.01,0.05,0.1,0.2"},
    {"sampling.alpha_grid", "100"},

    {"sim.P", "16"},
    {"sim.stripe_width", "128"},
    {"sim.height", "128"},
    {"sim.rock_radius", "28"},
    {"sim.strong", "1"},
    {"sim.weak_probability", "0.02"},
    {"sim.strong_probability", "0.4"},
    {"sim.iterations", "500"},
    {"sim.omega", "1000000"},
    {"sim.lb_cost_fixed", "0.01"},
    {"sim.lb_cost_per_unit", "5e-08"},
    {"sim.lb_cost_prior", "0.01"},
    {"sim.z_threshold", "3"},
    {"sim.wir_window", "5"},
    {"sim.policy", "ulba"},
    {"sim.alpha", "0.4"},

    {"compare.P_grid", "8,16,32"},
    {"compare.strong_grid", "1,2,3"},
    {"compare.seeds", "5"},
    {"compare.alpha", "0.4"},

    {"sweep.alphas", "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1"},
    {"sweep.seeds", "5"},
};
// clang-format on

const KeySpec* find_key(std::string_view key) {
  const auto it = std::find_if(std::begin(kKeys), std::end(kKeys),
                               [&](const KeySpec& k) { return k.key == key; });
  return it == std::end(kKeys) ? nullptr : it;
}

bool known_section(std::string_view section) {
  return std::any_of(std::begin(kKeys), std::end(kKeys), [&](const KeySpec& k) {
    return k.key.substr(0, k.key.find('.')) == section;
  });
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view expected,
                            std::string_view text) {
  throw ConfigError("key " + std::string(key) + ": expected " + std::string(expected) +
                    ", got '" + std::string(text) + "'");
}

template <class T>
T parse_number(std::string_view key, std::string_view expected, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    bad_value(key, expected, text);
  }
  return value;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    items.push_back(trim(item));
  }
  return items;
}

} // namespace

RunConfig::RunConfig() = default;

RunConfig RunConfig::from_string(std::string_view text, std::string_view origin) {
  RunConfig config;
  config.origin_ = std::string(origin);
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(config.origin_ + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(config.origin_ + ": key '" + section + "' outside any section");
    }
    if (!known_section(section)) {
      throw ConfigError(config.origin_ + ": unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      const std::string dotted = section + "." + key;
      if (find_key(dotted) == nullptr) {
        throw ConfigError(config.origin_ + ": unknown key '" + dotted + "'");
      }
      config.values_[dotted] = trim(value.data());
    }
  }
  return config;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str(), path.string());
}

void RunConfig::set(std::string_view dotted_key, std::string value) {
  if (find_key(dotted_key) == nullptr) {
    throw ConfigError("unknown key '" + std::string(dotted_key) + "'");
  }
  values_[std::string(dotted_key)] = trim(value);
}

void RunConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not section.key=value");
  }
  set(trim(assignment.substr(0, eq)), std::string(assignment.substr(eq + 1)));
}

bool RunConfig::is_set(std::string_view dotted_key) const {
  return values_.find(dotted_key) != values_.end();
}

bool RunConfig::has_value(std::string_view dotted_key) const {
  const KeySpec* spec = find_key(dotted_key);
  return is_set(dotted_key) || (spec != nullptr && spec->fallback.has_value());
}

std::string RunConfig::get_string(std::string_view dotted_key) const {
  const KeySpec* spec = find_key(dotted_key);
  if (spec == nullptr) {
    throw ConfigError("unknown key '" + std::string(dotted_key) + "'");
  }
  if (const auto it = values_.find(dotted_key); it != values_.end()) {
    return it->second;
  }
  if (!spec->fallback) {
    throw ConfigError(origin_ + ": missing required key '" + std::string(dotted_key) + "'");
  }
  return std::string(*spec->fallback);
}

std::int64_t RunConfig::get_int(std::string_view dotted_key) const {
  return parse_number<std::int64_t>(dotted_key, "an integer", get_string(dotted_key));
}

std::uint64_t RunConfig::get_u64(std::string_view dotted_key) const {
  return parse_number<std::uint64_t>(dotted_key, "an unsigned integer", get_string(dotted_key));
}

double RunConfig::get_double(std::string_view dotted_key) const {
  return parse_number<double>(dotted_key, "a number", get_string(dotted_key));
}

bool RunConfig::get_bool(std::string_view dotted_key) const {
  const std::string text = get_string(dotted_key);
  if (text == "true" || text == "1") {
    return true;
  }
  if (text == "false" || text == "0") {
    return false;
  }
  bad_value(dotted_key, "true or false", text);
}

std::vector<double> RunConfig::get_double_list(std::string_view dotted_key) const {
  std::vector<double> out;
  for (const auto& item : split_list(get_string(dotted_key))) {
    out.push_back(parse_number<double>(dotted_key, "a list of numbers", item));
  }
  return out;
}

std::vector<int> RunConfig::get_int_list(std::string_view dotted_key) const {
  std::vector<int> out;
  for (const auto& item : split_list(get_string(dotted_key))) {
    out.push_back(parse_number<int>(dotted_key, "a list of integers", item));
  }
  return out;
}

std::map<std::string, std::string> RunConfig::resolved() const {
  std::map<std::string, std::string> out;
  for (const auto& k : kKeys) {
    if (has_value(k.key)) {
      out.emplace(std::string(k.key), get_string(k.key));
    }
  }
  return out;
}

std::map<std::string, std::string> RunConfig::resolved(
    const std::vector<std::string>& sections) const {
  std::map<std::string, std::string> out;
  for (auto& [key, value] : resolved()) {
    const std::string section = key.substr(0, key.find('.'));
    if (std::find(sections.begin(), sections.end(), section) != sections.end()) {
      out.emplace(key, value);
    }
  }
  return out;
}

std::uint64_t resolve_seed(RunConfig& config, std::optional<std::uint64_t> flag,
                           const char* env_seed) {
  if (flag) {
    config.set("run.seed", std::to_string(*flag));
  } else if (!config.is_set("run.seed") && env_seed != nullptr && *env_seed != '\0') {
    const std::string text = trim(env_seed);
    config.set("run.seed",
               std::to_string(parse_number<std::uint64_t>("LBA_SEED", "an unsigned integer", text)));
  }
  return config.get_u64("run.seed");
}

namespace {

int to_int(const RunConfig& c, std::string_view key) {
  const std::int64_t v = c.get_int(key);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    bad_value(key, "a 32-bit integer", c.get_string(key));
  }
  return static_cast<int>(v);
}

} // namespace

AppInstance instance_from(const RunConfig& c) {
  AppInstance inst;
  inst.pe_count = to_int(c, "instance.P");
  inst.overloading_count = to_int(c, "instance.N");
  inst.iterations = c.get_int("instance.gamma");
  inst.initial_workload = c.get_double("instance.w0");
  inst.uniform_growth = c.get_double("instance.a");
  inst.extra_growth = c.get_double("instance.m");
  inst.alpha = c.get_double("instance.alpha");
  inst.pe_speed = c.get_double("instance.omega");
  inst.lb_cost = c.get_double("instance.C");
  return inst;
}

Policy instance_policy(const RunConfig& c) {
  return parse_policy(c.get_string("instance.policy"));
}

TotalTimeOptions time_options_from(const RunConfig& c) {
  return TotalTimeOptions{c.get_bool("instance.free_initial_balance")};
}

AnnealParams anneal_params_from(const RunConfig& c, std::uint64_t seed) {
  AnnealParams p;
  p.initial_temperature = c.get_double("anneal.initial_temperature");
  p.final_temperature = c.get_double("anneal.final_temperature");
  p.steps = to_int(c, "anneal.steps");
  p.moves_per_temperature = to_int(c, "anneal.moves_per_temperature");
  p.seed = seed;
  try {
    validate(p);
  } catch (const ModelError& e) {
    throw ConfigError(std::string("section [anneal]: ") + e.what());
  }
  return p;
}

SamplingSpec sampling_from(const RunConfig& c, std::uint64_t seed) {
  SamplingSpec s;
  s.pe_choices = c.get_int_list("sampling.P_choices");
  s.overload_min = c.get_double("sampling.overload_min");
  s.overload_max = c.get_double("sampling.overload_max");
  s.iterations = c.get_int("sampling.gamma");
  s.work_min = c.get_double("sampling.work_min");
  s.work_max = c.get_double("sampling.work_max");
  s.growth_min = c.get_double("sampling.growth_min");
  s.growth_max = c.get_double("sampling.growth_max");
  s.skew_min = c.get_double("sampling.skew_min");
  s.skew_max = c.get_double("sampling.skew_max");
  s.alpha_min = c.get_double("sampling.alpha_min");
  s.alpha_max = c.get_double("sampling.alpha_max");
  if (c.has_value("sampling.alpha")) {
    s.alpha = c.get_double("sampling.alpha");
  }
  s.cost_min = c.get_double("sampling.cost_min");
  s.cost_max = c.get_double("sampling.cost_max");
  s.pe_speed = c.get_double("sampling.omega");
  s.count = to_int(c, "sampling.count");
  s.seed = seed;
  validate(s);
  return s;
}

ErosionConfig erosion_from(const RunConfig& c) {
  ErosionConfig e;
  e.pe_count = to_int(c, "sim.P");
  e.stripe_width = to_int(c, "sim.stripe_width");
  e.height = to_int(c, "sim.height");
  e.rock_radius = to_int(c, "sim.rock_radius");
  e.strong_count = to_int(c, "sim.strong");
  e.weak_probability = c.get_double("sim.weak_probability");
  e.strong_probability = c.get_double("sim.strong_probability");
  e.iterations = c.get_int("sim.iterations");
  e.pe_speed = c.get_double("sim.omega");
  e.lb_cost_fixed = c.get_double("sim.lb_cost_fixed");
  e.lb_cost_per_unit = c.get_double("sim.lb_cost_per_unit");
  e.lb_cost_prior = c.get_double("sim.lb_cost_prior");
  e.z_threshold = c.get_double("sim.z_threshold");
  e.wir_window = to_int(c, "sim.wir_window");
  validate(e);
  return e;
}

std::vector<std::uint64_t> seed_range(std::uint64_t seed, std::int64_t count) {
  if (count < 1) {
    throw ConfigError("seed count must be at least 1");
  }
  std::vector<std::uint64_t> seeds;
  for (std::int64_t k = 0; k < count; ++k) {
    seeds.push_back(seed + static_cast<std::uint64_t>(k));
  }
  return seeds;
}

} // namespace ulba
