#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "projfilt/scenario.hpp"

namespace {

// every override flag maps straight onto a config key
const std::vector<std::string> kOverrideKeys = {
    "model.preset",      "model.epsilon",
    "model.beta",        "model.sigma",
    "model.drift_slope", "prior.mean",
    "prior.sd",          "run.horizon",
    "run.dt",            "run.seeds",
    "run.filters",       "run.threads",
    "grid.half_width",   "grid.points",
    "grid.boundary_tolerance",
    "quadrature.order",  "sweep.epsilons",
    "probe.horizons",    "probe.trials",
    "probe.substeps",    "probe.seed",
    "probe.kinds",       "output.dir",
    "output.stem",
};

struct SubcommandArgs {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::vector<std::string> extra_sets;
};

void add_common_options(CLI::App* cmd, SubcommandArgs& args) {
  cmd->add_option("config", args.config_path, "scenario configuration file")
      ->required();
  for (const std::string& key : kOverrideKeys) {
    cmd->add_option("--" + key, args.overrides[key],
                    "override config key " + key);
  }
  cmd->add_option("--out", args.overrides["output.dir"],
                  "output directory (same as --output.dir)");
  cmd->add_option("--set", args.extra_sets,
                  "extra overrides as section.key=value")
      ->take_all();
}

projfilt::ScenarioConfig load_with_overrides(const SubcommandArgs& args) {
  projfilt::ScenarioConfig config = projfilt::load_config(args.config_path);
  for (const auto& [key, value] : args.overrides) {
    if (!value.empty()) projfilt::apply_config_entry(config, key, value);
  }
  for (const std::string& entry : args.extra_sets) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      throw projfilt::ConfigError("--set expects section.key=value, got '" +
                                  entry + "'");
    }
    projfilt::apply_config_entry(config, entry.substr(0, eq),
                                 entry.substr(eq + 1));
  }
  projfilt::validate_config(config);
  return config;
}

int do_run(const projfilt::ScenarioConfig& config) {
  const projfilt::ScenarioOutput output = projfilt::run_scenario(config);
  long truncated = 0;
  for (const auto& run : output.runs) {
    for (const auto& series : run.series) {
      if (series.truncated) ++truncated;
    }
    if (run.reference_truncated) {
      std::cout << "warning: reference solver truncated for seed " << run.seed
                << "\n";
    }
  }
  for (const std::string& path : output.csv_paths) {
    std::cout << "wrote " << path << "\n";
  }
  std::cout << "wrote " << output.summary_path << "\n";
  if (truncated > 0) {
    std::cout << truncated << " filter series truncated before the horizon\n";
  }
  return 0;
}

int do_sweep(const projfilt::ScenarioConfig& config) {
  const projfilt::EpsilonSweepResult result = projfilt::epsilon_sweep(config);
  std::printf("%-8s %12s %12s\n", "filter", "slope", "exact");
  for (const auto& [name, slope] : result.slopes) {
    std::printf("%-8s %12.4f %12s\n", name.c_str(), slope,
                result.exact_match.at(name) ? "yes" : "no");
  }
  return 0;
}

int do_probe(const projfilt::ScenarioConfig& config) {
  const projfilt::ProbeOrdersResult result = projfilt::probe_orders(config);
  std::printf("%-14s %-26s %10s %10s\n", "kind", "criterion", "slope",
              "discarded");
  for (const auto& [kind, probe] : result.by_kind) {
    const std::string name = projfilt::projection_kind_name(kind);
    const auto line = [&](const char* criterion,
                          const projfilt::CriterionTable& table) {
      if (table.degenerate) {
        std::printf("%-14s %-26s %10s %10ld\n", name.c_str(), criterion,
                    "degenerate", probe.discarded);
      } else {
        std::printf("%-14s %-26s %10.4f %10ld\n", name.c_str(), criterion,
                    table.slope, probe.discarded);
      }
    };
    line("strong_ambient", probe.strong_ambient);
    line("weak_ambient", probe.weak_ambient);
    line("strong_metric_projection", probe.strong_metric_projection);
  }
  return 0;
}

int do_validate(const projfilt::ScenarioConfig& config) {
  // dry run: touch every component the scenario will need
  const projfilt::FilterModel model = projfilt::make_model(config);
  const projfilt::GaussianFamily family;
  const projfilt::GaussHermiteRule rule =
      projfilt::gauss_hermite_rule(config.quadrature_order);
  projfilt::VectorXd theta(2);
  theta << config.prior_mean, config.prior_sd;
  projfilt::FilterState state{theta, 0.0};
  projfilt::projection_filter_step(model, family, state, config.dt, 0.0,
                                   projfilt::ProjectionKind::ito_jet,
                                   projfilt::MetricMode::hellinger, rule);
  projfilt::GridDensity grid = projfilt::make_grid_density(
      config.grid_half_width, config.grid_points,
      [&](double x) { return family.density(theta, x); });
  grid.boundary_tolerance = config.grid_boundary_tolerance;
  projfilt::fd_ks_step(model, grid, 0.0, config.dt, 0.0);

  std::cout << "config OK: preset=" << config.preset
            << " steps=" << static_cast<long>(config.horizon / config.dt + 0.5)
            << " seeds=" << config.seeds.size()
            << " filters=" << config.filters.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SDE projection and projection-filter benchmarks"};
  app.require_subcommand(1);

  SubcommandArgs run_args, sweep_args, probe_args, validate_args;
  CLI::App* run_cmd =
      app.add_subcommand("run", "simulate a scenario and write CSV series");
  add_common_options(run_cmd, run_args);
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep-epsilon", "drift-coefficient gaps against the assumed-density "
                       "filter across epsilon");
  add_common_options(sweep_cmd, sweep_args);
  CLI::App* probe_cmd = app.add_subcommand(
      "probe-orders", "Monte Carlo optimality orders on the circle test SDE");
  add_common_options(probe_cmd, probe_args);
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "check a configuration without running");
  add_common_options(validate_cmd, validate_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) return do_run(load_with_overrides(run_args));
    if (sweep_cmd->parsed()) return do_sweep(load_with_overrides(sweep_args));
    if (probe_cmd->parsed()) return do_probe(load_with_overrides(probe_args));
    if (validate_cmd->parsed()) {
      return do_validate(load_with_overrides(validate_args));
    }
  } catch (const projfilt::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 2;
  } catch (const projfilt::Error& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return 3;
  }
  return 2;
}
