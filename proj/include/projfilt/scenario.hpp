#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "projfilt/filters.hpp"
#include "projfilt/grid_filter.hpp"
#include "projfilt/projection.hpp"

namespace projfilt {

enum class FilterId {
  strat_l2,
  strat_hell,
  vec_l2,
  vec_hell,
  jet_l2,
  jet_hell,
  kalman,
  ekf,
  adf,
};

std::string filter_name(FilterId id);
std::optional<FilterId> parse_filter_name(const std::string& name);
std::vector<FilterId> all_filters();

struct ScenarioConfig {
  // model
  std::string preset = "cubic_sensor";  // cubic_sensor | linear
  double epsilon = 0.05;
  double beta = 1.0;
  double sigma = 1.0;
  double drift_slope = 0.0;
  // prior
  double prior_mean = 0.0;
  double prior_sd = 1.0;
  // run
  double horizon = 1.0;
  double dt = 1e-3;
  std::vector<std::uint64_t> seeds;
  std::vector<FilterId> filters;
  int threads = 0;  // 0 = hardware concurrency
  // grid
  double grid_half_width = 8.0;
  int grid_points = 400;
  double grid_boundary_tolerance = 1e-6;
  // quadrature
  int quadrature_order = 40;
  // epsilon sweep
  std::vector<double> sweep_epsilons = {0.01, 0.02, 0.04, 0.07, 0.1};
  // order probes
  std::vector<double> probe_horizons = {0.0625,      0.03125,      0.015625,
                                        0.0078125,   0.00390625,   0.001953125,
                                        0.0009765625};
  int probe_trials = 100000;
  int probe_substeps = 64;
  std::uint64_t probe_seed = 1;
  std::vector<ProjectionKind> probe_kinds = {ProjectionKind::ito_jet,
                                             ProjectionKind::ito_vector};
  // output
  std::string out_dir = "out";
  std::string stem = "scenario";

  ScenarioConfig();
};

/// Applies one "section.key" assignment; throws ConfigError on unknown keys
/// or malformed values.
void apply_config_entry(ScenarioConfig& config, const std::string& dotted_key,
                        const std::string& value);

/// Loads a sectioned key = value file ('#' and ';' comments).
ScenarioConfig load_config(const std::string& path);

void validate_config(const ScenarioConfig& config);

FilterModel make_model(const ScenarioConfig& config);

/// Output directory after the PROJFILT_OUT environment override.
std::string resolve_out_dir(const ScenarioConfig& config);

struct FilterSeries {
  FilterId id = FilterId::kalman;
  // one entry per time index while the filter is alive
  std::vector<std::array<double, 2>> params;  // (mean, sd)
  std::vector<double> res_l2;
  std::vector<double> res_hell;
  bool truncated = false;
  std::string truncation_reason;

  bool alive_at(std::size_t index) const { return index < params.size(); }
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<FilterSeries> series;
  std::vector<std::array<double, 2>> reference_moments;
  bool reference_truncated = false;
  std::uint64_t dy_checksum = 0;
};

RunResult run_single_seed(const ScenarioConfig& config, std::uint64_t seed);

struct ScenarioOutput {
  std::vector<RunResult> runs;
  std::vector<std::string> csv_paths;
  std::string summary_path;
};

/// Runs every seed (in parallel when configured), writes one wide CSV per
/// seed plus a seed-averaged summary, and returns everything in memory.
ScenarioOutput run_scenario(const ScenarioConfig& config, bool write_csv = true);

/// Seed-averaged residuals and parameters on the shared time grid; entries
/// average only the seeds whose series are alive at that time.
struct SummaryTable {
  std::vector<double> times;
  std::map<FilterId, std::vector<double>> avg_res_l2;
  std::map<FilterId, std::vector<double>> avg_res_hell;
  std::map<FilterId, std::vector<std::array<double, 2>>> avg_params;
  std::map<FilterId, std::vector<int>> alive_counts;
};

SummaryTable summarize(const ScenarioOutput& output,
                       const ScenarioConfig& config);

struct EpsilonSweepResult {
  std::vector<double> epsilons;
  // Hellinger-mode drift gaps |A_kind - A_adf| at the prior point
  std::map<std::string, std::vector<double>> gaps;  // keys: jet, vector, strat
  std::map<std::string, double> slopes;
  std::map<std::string, bool> exact_match;  // all gaps at rounding level
};

EpsilonSweepResult epsilon_sweep(const ScenarioConfig& config,
                                 bool write_csv = true);

struct ProbeOrdersResult {
  std::vector<std::pair<ProjectionKind, OrderProbeResult>> by_kind;
};

ProbeOrdersResult probe_orders(const ScenarioConfig& config,
                               bool write_csv = true);

std::string projection_kind_name(ProjectionKind kind);

}  // namespace projfilt
