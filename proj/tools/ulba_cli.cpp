// Command-line driver: bounds, schedules, annealing, Monte-Carlo experiments
// and erosion simulations.

#include "ulba/experiments.hpp"
#include "ulba/interval_optimizer.hpp"
#include "ulba/model.hpp"
#include "ulba/report.hpp"
#include "ulba/run_config.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using ulba::format_number;
using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitModel = 3;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 0;
  bool json = false;
  std::vector<std::string> overrides;
};

struct Context {
  ulba::RunConfig config;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  int jobs = 1;
  bool json = false;
};

Context make_context(const Options& opt) {
  Context ctx;
  if (!opt.config_path.empty()) {
    ctx.config = ulba::RunConfig::from_file(opt.config_path);
  }
  for (const auto& assignment : opt.overrides) {
    ctx.config.apply_override(assignment);
  }
  if (!opt.out.empty()) {
    ctx.config.set("run.out", opt.out);
  }
  if (opt.jobs > 0) {
    ctx.config.set("run.jobs", std::to_string(opt.jobs));
  }
  ctx.seed = ulba::resolve_seed(ctx.config, opt.seed, std::getenv("LBA_SEED"));
  ctx.out = ctx.config.get_string("run.out");
  ctx.jobs = static_cast<int>(ctx.config.get_int("run.jobs"));
  if (ctx.jobs < 1) {
    throw ulba::ConfigError("key run.jobs: must be at least 1");
  }
  ctx.json = opt.json;
  return ctx;
}

/// Resolved keys of `sections` for the manifest. The output directory is left
/// out so a rerun elsewhere yields the same manifest.
std::map<std::string, std::string> manifest_config(const Context& ctx,
                                                   std::vector<std::string> sections) {
  auto config = ctx.config.resolved(sections);
  config.erase("run.out");
  return config;
}

/// Prints the one-line summary, as key=value pairs or as a JSON object.
void print_summary(const Context& ctx, std::string_view command, const Json& fields) {
  if (ctx.json) {
    Json line;
    line["command"] = std::string(command);
    line.update(fields);
    std::cout << line.dump() << "\n";
    return;
  }
  std::string text(command);
  for (const auto& [key, value] : fields.items()) {
    text += " " + key + "=";
    text += value.is_string() ? value.get<std::string>()
            : value.is_number_float() ? format_number(value.get<double>())
                                      : value.dump();
  }
  std::cout << text << "\n";
}

void print_paths(const Context& ctx, const ulba::OutputPaths& paths) {
  if (!ctx.json) {
    std::cout << "wrote " << paths.csv.string() << " " << paths.json.string() << "\n";
  }
}

int cmd_bounds(const Context& ctx) {
  const ulba::AppInstance inst = ulba::instance_from(ctx.config);
  ulba::validate(inst);
  const ulba::UpperBound bound = ulba::upper_bound(inst, 0);
  const double standard_period = ulba::standard_interval(inst);
  const auto tau = static_cast<double>(bound.upper - bound.lower);
  const double imbalance = ulba::imbalance_cost(inst, tau);
  const double overhead = ulba::overhead_cost(inst, 0, tau);

  Json fields;
  fields["sigma_minus"] = bound.lower;
  fields["sigma_plus"] = bound.upper;
  fields["tau_root"] = bound.tau;
  fields["standard_interval"] = standard_period;
  fields["imbalance_cost_s"] = imbalance;
  fields["overhead_cost_s"] = overhead;
  fields["lb_cost_s"] = inst.lb_cost;
  print_summary(ctx, "bounds", fields);
  return kExitOk;
}

int cmd_schedule(const Context& ctx) {
  const ulba::AppInstance inst = ulba::instance_from(ctx.config);
  ulba::validate(inst);
  const ulba::Policy policy = ulba::instance_policy(ctx.config);
  const ulba::TotalTimeOptions options = ulba::time_options_from(ctx.config);
  const ulba::LBSchedule schedule = ulba::sigma_plus_schedule(inst);
  const double total = ulba::total_time(inst, policy, schedule, options);

  Json man = ulba::manifest("schedule", ctx.seed, manifest_config(ctx, {"run", "instance"}));
  man["lb_calls"] = schedule.calls();
  man["total_time_s"] = total;
  const auto paths = ulba::write_outputs(ctx.out, "schedule", ctx.seed,
                                         ulba::schedule_csv(inst, policy, schedule, options), man);
  print_summary(ctx, "schedule",
                {{"policy", std::string(ulba::to_string(policy))},
                 {"total_time_s", total},
                 {"lb_calls", schedule.interval_count()}});
  print_paths(ctx, paths);
  return kExitOk;
}

int cmd_anneal(const Context& ctx) {
  const ulba::AppInstance inst = ulba::instance_from(ctx.config);
  ulba::validate(inst);
  const ulba::Policy policy = ulba::instance_policy(ctx.config);
  const ulba::AnnealParams params = ulba::anneal_params_from(ctx.config, ctx.seed);
  const ulba::ScheduleResult result = ulba::anneal(inst, policy, params);
  const ulba::LBSchedule schedule = result.state.to_schedule();

  double bound_time = 0.0;
  std::optional<double> gain;
  try {
    bound_time = ulba::total_time(inst, policy, ulba::sigma_plus_schedule(inst));
    gain = ulba::relative_gain(result.energy, bound_time);
  } catch (const ulba::NoImbalance&) {
    // no bound schedule to compare against
  }

  Json man = ulba::manifest("anneal", ctx.seed,
                            manifest_config(ctx, {"run", "instance", "anneal"}));
  man["lb_calls"] = schedule.calls();
  man["anneal_time_s"] = result.energy;
  if (gain) {
    man["sigma_plus_time_s"] = bound_time;
    man["gain_pct"] = *gain;
  }
  const auto paths = ulba::write_outputs(ctx.out, "anneal", ctx.seed,
                                         ulba::schedule_csv(inst, policy, schedule), man);
  Json fields{{"total_time_s", result.energy}, {"lb_calls", schedule.interval_count()}};
  if (gain) {
    fields["sigma_plus_time_s"] = bound_time;
    fields["gain_pct"] = *gain;
  }
  print_summary(ctx, "anneal", fields);
  print_paths(ctx, paths);
  return kExitOk;
}

int cmd_mc_anneal(const Context& ctx) {
  const ulba::SamplingSpec spec = ulba::sampling_from(ctx.config, ctx.seed);
  const ulba::AnnealParams params = ulba::anneal_params_from(ctx.config, ctx.seed);
  const ulba::BoundVsAnneal result = ulba::exp_bound_vs_anneal(spec, params, ctx.jobs);

  Json man = ulba::manifest("mc-anneal", ctx.seed,
                            manifest_config(ctx, {"run", "sampling", "anneal"}));
  man["gain_pct"] = ulba::summary_json(result.gain);
  man["histogram"] = {{"lower", result.distribution.lower},
                      {"bin_width", result.distribution.bin_width},
                      {"counts", result.distribution.counts}};
  const auto paths = ulba::write_outputs(ctx.out, "mc-anneal", ctx.seed,
                                         ulba::bound_vs_anneal_csv(result, spec), man);
  print_summary(ctx, "mc-anneal",
                {{"instances", result.records.size()},
                 {"gain_min_pct", result.gain.min},
                 {"gain_mean_pct", result.gain.mean},
                 {"gain_max_pct", result.gain.max}});
  print_paths(ctx, paths);
  return kExitOk;
}

int cmd_mc_gain(const Context& ctx) {
  const ulba::SamplingSpec spec = ulba::sampling_from(ctx.config, ctx.seed);
  const std::vector<double> fractions = ctx.config.get_double_list("sampling.fractions");
  const auto grid = static_cast<int>(ctx.config.get_int("sampling.alpha_grid"));
  const ulba::GainVsOverload result = ulba::exp_gain_vs_overload(fractions, grid, spec, ctx.jobs);

  Json man = ulba::manifest("mc-gain", ctx.seed, manifest_config(ctx, {"run", "sampling"}));
  Json cells = Json::array();
  double best = 0.0;
  for (const auto& c : result.cells) {
    cells.push_back({{"fraction", c.fraction},
                     {"gain_pct", ulba::summary_json(c.gain)},
                     {"mean_best_alpha", c.mean_best_alpha}});
    best = std::max(best, c.gain.max);
  }
  man["cells"] = cells;
  const auto paths = ulba::write_outputs(ctx.out, "mc-gain", ctx.seed,
                                         ulba::gain_vs_overload_csv(result, spec), man);
  ulba::write_csv(ctx.out, "mc-gain-cells", ctx.seed, ulba::overload_cells_csv(result));
  print_summary(ctx, "mc-gain", {{"cells", result.cells.size()}, {"gain_max_pct", best}});
  print_paths(ctx, paths);
  return kExitOk;
}

int cmd_sim(const Context& ctx) {
  const ulba::ErosionConfig config = ulba::erosion_from(ctx.config);
  const ulba::Policy policy = ulba::parse_policy(ctx.config.get_string("sim.policy"));
  const double alpha = ctx.config.get_double("sim.alpha");
  const ulba::SimResult result = ulba::run_simulation(config, policy, alpha, ctx.seed);

  Json man = ulba::manifest("sim", ctx.seed, manifest_config(ctx, {"run", "sim"}));
  man["total_time_s"] = result.total_time;
  man["compute_time_s"] = result.compute_time;
  man["lb_time_s"] = result.lb_time;
  man["mean_pe_usage_pct"] = result.mean_pe_usage;
  man["lb_events"] = ulba::lb_events_json(result);
  const auto paths =
      ulba::write_outputs(ctx.out, "sim", ctx.seed, ulba::simulation_csv(result), man);
  print_summary(ctx, "sim",
                {{"policy", std::string(ulba::to_string(policy))},
                 {"total_time_s", result.total_time},
                 {"lb_calls", result.lb_calls()},
                 {"mean_pe_usage_pct", result.mean_pe_usage}});
  print_paths(ctx, paths);
  return kExitOk;
}

int cmd_sim_compare(const Context& ctx) {
  const ulba::ErosionConfig base = ulba::erosion_from(ctx.config);
  const std::vector<int> pes = ctx.config.get_int_list("compare.P_grid");
  const std::vector<int> strong = ctx.config.get_int_list("compare.strong_grid");
  const double alpha = ctx.config.get_double("compare.alpha");
  const auto seeds = ulba::seed_range(ctx.seed, ctx.config.get_int("compare.seeds"));
  const auto rows = ulba::exp_sim_compare(base, pes, strong, alpha, seeds, ctx.jobs);

  Json man = ulba::manifest("sim-compare", ctx.seed,
                            manifest_config(ctx, {"run", "sim", "compare"}));
  man["seeds"] = seeds;
  const auto paths =
      ulba::write_outputs(ctx.out, "sim-compare", ctx.seed, ulba::compare_csv(rows), man);
  int wins = 0;
  for (const auto& r : rows) {
    wins += r.ulba_time <= r.standard_time ? 1 : 0;
  }
  print_summary(ctx, "sim-compare", {{"cells", rows.size()}, {"ulba_not_slower", wins}});
  print_paths(ctx, paths);
  return kExitOk;
}

int cmd_alpha_sweep(const Context& ctx) {
  const ulba::ErosionConfig config = ulba::erosion_from(ctx.config);
  const std::vector<double> alphas = ctx.config.get_double_list("sweep.alphas");
  const auto seeds = ulba::seed_range(ctx.seed, ctx.config.get_int("sweep.seeds"));
  const ulba::AlphaSweep result = ulba::exp_alpha_sweep(config, alphas, seeds, ctx.jobs);

  Json man = ulba::manifest("alpha-sweep", ctx.seed,
                            manifest_config(ctx, {"run", "sim", "sweep"}));
  man["seeds"] = seeds;
  man["standard_median_total_time_s"] = result.standard_median_total_time;
  const auto paths =
      ulba::write_outputs(ctx.out, "alpha-sweep", ctx.seed, ulba::alpha_sweep_csv(result), man);
  const auto best = std::min_element(
      result.rows.begin(), result.rows.end(),
      [](const auto& x, const auto& y) { return x.median_total_time < y.median_total_time; });
  Json fields{{"standard_median_time_s", result.standard_median_total_time}};
  if (best != result.rows.end()) {
    fields["best_alpha"] = best->alpha;
    fields["best_median_time_s"] = best->median_total_time;
  }
  print_summary(ctx, "alpha-sweep", fields);
  print_paths(ctx, paths);
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Load-balancing interval model, schedule optimizer and erosion simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--config", opt.config_path, "INI configuration file");
  app.add_option("--seed", opt.seed, "master seed (default: run.seed, then LBA_SEED)");
  app.add_option("--out", opt.out, "output directory");
  app.add_option("--jobs", opt.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--json", opt.json, "print the summary as JSON");
  app.add_option("--set", opt.overrides, "override a config value, section.key=value");

  using Handler = int (*)(const Context&);
  const std::pair<const char*, Handler> commands[] = {
      {"bounds", cmd_bounds},
      {"schedule", cmd_schedule},
      {"anneal", cmd_anneal},
      {"mc-anneal", cmd_mc_anneal},
      {"mc-gain", cmd_mc_gain},
      {"sim", cmd_sim},
      {"sim-compare", cmd_sim_compare},
      {"alpha-sweep", cmd_alpha_sweep},
  };
  const char* descriptions[] = {
      "print the rebalancing bounds of one instance",
      "write the bound-driven LB schedule of one instance",
      "anneal the LB schedule of one instance",
      "bound schedule vs annealed schedule over sampled instances",
      "ULBA gain vs overloading fraction over sampled instances",
      "run the erosion simulation",
      "standard vs ULBA over a grid of PE counts and strong rocks",
      "erosion simulation over a grid of alphas",
  };
  std::vector<CLI::App*> subs;
  for (std::size_t k = 0; k < std::size(commands); ++k) {
    subs.push_back(app.add_subcommand(commands[k].first, descriptions[k]));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const Context ctx = make_context(opt);
    for (std::size_t k = 0; k < subs.size(); ++k) {
      if (subs[k]->parsed()) {
        return commands[k].second(ctx);
      }
    }
    return kExitOther;
  } catch (const ulba::ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitModel;
  } catch (const ulba::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
}
