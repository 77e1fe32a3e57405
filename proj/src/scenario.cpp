#include "projfilt/scenario.hpp"

#include "projfilt/embeddings.hpp"
#include "projfilt/rng.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace projfilt {

namespace {

const std::vector<std::pair<FilterId, std::string>>& filter_table() {
  static const std::vector<std::pair<FilterId, std::string>> table = {
      {FilterId::strat_l2, "strat_l2"}, {FilterId::strat_hell, "strat_hell"},
      {FilterId::vec_l2, "vec_l2"},     {FilterId::vec_hell, "vec_hell"},
      {FilterId::jet_l2, "jet_l2"},     {FilterId::jet_hell, "jet_hell"},
      {FilterId::kalman, "kalman"},     {FilterId::ekf, "ekf"},
      {FilterId::adf, "adf"},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream stream(s);
  while (std::getline(stream, item, sep)) {
    const std::string trimmed = trim(item);
    if (!trimmed.empty()) out.push_back(trimmed);
  }
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": '" + value + "'");
  }
}

long to_long(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long parsed = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for " + key + ": '" + value + "'");
  }
}

std::vector<std::uint64_t> parse_seeds(const std::string& value) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& item : split(value, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      seeds.push_back(static_cast<std::uint64_t>(to_long("seeds", item)));
    } else {
      const long lo = to_long("seeds", item.substr(0, colon));
      const long hi = to_long("seeds", item.substr(colon + 1));
      if (hi < lo) throw ConfigError("seed range is reversed: " + item);
      for (long s = lo; s <= hi; ++s) {
        seeds.push_back(static_cast<std::uint64_t>(s));
      }
    }
  }
  return seeds;
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

}  // namespace

std::string filter_name(FilterId id) {
  for (const auto& [fid, name] : filter_table()) {
    if (fid == id) return name;
  }
  return "unknown";
}

std::optional<FilterId> parse_filter_name(const std::string& name) {
  for (const auto& [fid, fname] : filter_table()) {
    if (fname == name) return fid;
  }
  return std::nullopt;
}

std::vector<FilterId> all_filters() {
  std::vector<FilterId> out;
  for (const auto& [fid, name] : filter_table()) out.push_back(fid);
  return out;
}

std::string projection_kind_name(ProjectionKind kind) {
  switch (kind) {
    case ProjectionKind::stratonovich:
      return "stratonovich";
    case ProjectionKind::ito_vector:
      return "ito_vector";
    case ProjectionKind::ito_jet:
      return "ito_jet";
  }
  return "unknown";
}

ScenarioConfig::ScenarioConfig() {
  for (std::uint64_t s = 1; s <= 20; ++s) seeds.push_back(s);
  filters = all_filters();
}

void apply_config_entry(ScenarioConfig& config, const std::string& dotted_key,
                        const std::string& value) {
  const std::string key = trim(dotted_key);
  const std::string v = trim(value);
  if (key == "model.preset") {
    config.preset = v;
  } else if (key == "model.epsilon") {
    config.epsilon = to_double(key, v);
  } else if (key == "model.beta") {
    config.beta = to_double(key, v);
  } else if (key == "model.sigma") {
    config.sigma = to_double(key, v);
  } else if (key == "model.drift_slope") {
    config.drift_slope = to_double(key, v);
  } else if (key == "prior.mean") {
    config.prior_mean = to_double(key, v);
  } else if (key == "prior.sd") {
    config.prior_sd = to_double(key, v);
  } else if (key == "run.horizon") {
    config.horizon = to_double(key, v);
  } else if (key == "run.dt") {
    config.dt = to_double(key, v);
  } else if (key == "run.seeds") {
    config.seeds = parse_seeds(v);
  } else if (key == "run.threads") {
    config.threads = static_cast<int>(to_long(key, v));
  } else if (key == "run.filters") {
    config.filters.clear();
    for (const std::string& name : split(v, ',')) {
      const auto fid = parse_filter_name(name);
      if (!fid) throw ConfigError("unknown filter '" + name + "'");
      config.filters.push_back(*fid);
    }
  } else if (key == "grid.half_width") {
    config.grid_half_width = to_double(key, v);
  } else if (key == "grid.points") {
    config.grid_points = static_cast<int>(to_long(key, v));
  } else if (key == "grid.boundary_tolerance") {
    config.grid_boundary_tolerance = to_double(key, v);
  } else if (key == "quadrature.order") {
    config.quadrature_order = static_cast<int>(to_long(key, v));
  } else if (key == "sweep.epsilons") {
    config.sweep_epsilons.clear();
    for (const std::string& item : split(v, ',')) {
      config.sweep_epsilons.push_back(to_double(key, item));
    }
  } else if (key == "probe.horizons") {
    config.probe_horizons.clear();
    for (const std::string& item : split(v, ',')) {
      config.probe_horizons.push_back(to_double(key, item));
    }
  } else if (key == "probe.trials") {
    config.probe_trials = static_cast<int>(to_long(key, v));
  } else if (key == "probe.substeps") {
    config.probe_substeps = static_cast<int>(to_long(key, v));
  } else if (key == "probe.seed") {
    config.probe_seed = static_cast<std::uint64_t>(to_long(key, v));
  } else if (key == "probe.kinds") {
    config.probe_kinds.clear();
    for (const std::string& name : split(v, ',')) {
      if (name == "stratonovich") {
        config.probe_kinds.push_back(ProjectionKind::stratonovich);
      } else if (name == "ito_vector" || name == "vector") {
        config.probe_kinds.push_back(ProjectionKind::ito_vector);
      } else if (name == "ito_jet" || name == "jet") {
        config.probe_kinds.push_back(ProjectionKind::ito_jet);
      } else {
        throw ConfigError("unknown projection kind '" + name + "'");
      }
    }
  } else if (key == "output.dir") {
    config.out_dir = v;
  } else if (key == "output.stem") {
    config.stem = v;
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config file '" + path + "'");
  ScenarioConfig config;
  std::string line;
  std::string section;
  int line_number = 0;
  while (std::getline(file, line)) {
    ++line_number;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("malformed section at line " +
                          std::to_string(line_number));
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected key = value at line " +
                        std::to_string(line_number));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    apply_config_entry(config, section.empty() ? key : section + "." + key,
                       value);
  }
  return config;
}

void validate_config(const ScenarioConfig& config) {
  if (config.preset != "cubic_sensor" && config.preset != "linear") {
    throw ConfigError("unknown model preset '" + config.preset + "'");
  }
  if (config.epsilon < 0.0) throw ConfigError("epsilon must be >= 0");
  if (!(config.prior_sd > 0.0)) throw ConfigError("prior sd must be positive");
  if (!(config.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(config.horizon > 0.0)) throw ConfigError("horizon must be positive");
  const double steps = config.horizon / config.dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
    throw ConfigError("horizon must be an integer number of steps");
  }
  if (config.grid_points < 100) throw ConfigError("grid needs >= 100 points");
  if (!(config.grid_half_width > 0.0)) {
    throw ConfigError("grid half width must be positive");
  }
  if (config.quadrature_order < 4) {
    throw ConfigError("quadrature order too small");
  }
  if (config.seeds.empty()) throw ConfigError("at least one seed required");
  if (config.filters.empty()) throw ConfigError("filter roster is empty");
  if (config.probe_trials <= 0 || config.probe_substeps <= 0) {
    throw ConfigError("probe trials and substeps must be positive");
  }
  for (double h : config.probe_horizons) {
    if (!(h > 0.0)) throw ConfigError("probe horizons must be positive");
  }
}

FilterModel make_model(const ScenarioConfig& config) {
  if (config.preset == "cubic_sensor") return cubic_sensor_model(config.epsilon);
  if (config.preset == "linear") {
    return linear_sensor_model(config.beta, config.sigma, config.drift_slope);
  }
  throw ConfigError("unknown model preset '" + config.preset + "'");
}

std::string resolve_out_dir(const ScenarioConfig& config) {
  if (const char* env = std::getenv("PROJFILT_OUT")) {
    if (env[0] != '\0') return env;
  }
  return config.out_dir;
}

namespace {

struct LiveFilter {
  FilterId id;
  bool is_projection = false;
  ProjectionKind kind = ProjectionKind::ito_jet;
  MetricMode mode = MetricMode::direct;
  FilterState state;
  MomentState moments;
  bool alive = true;
  std::string failure;

  std::array<double, 2> params() const {
    if (is_projection) return {state.theta[0], state.theta[1]};
    return {moments.mean, std::sqrt(moments.var)};
  }
};

LiveFilter make_live_filter(FilterId id, const ScenarioConfig& config) {
  LiveFilter f;
  f.id = id;
  VectorXd theta(2);
  theta << config.prior_mean, config.prior_sd;
  f.state = FilterState{theta, 0.0};
  f.moments = MomentState{config.prior_mean, config.prior_sd * config.prior_sd};
  switch (id) {
    case FilterId::strat_l2:
      f.is_projection = true;
      f.kind = ProjectionKind::stratonovich;
      f.mode = MetricMode::direct;
      break;
    case FilterId::strat_hell:
      f.is_projection = true;
      f.kind = ProjectionKind::stratonovich;
      f.mode = MetricMode::hellinger;
      break;
    case FilterId::vec_l2:
      f.is_projection = true;
      f.kind = ProjectionKind::ito_vector;
      f.mode = MetricMode::direct;
      break;
    case FilterId::vec_hell:
      f.is_projection = true;
      f.kind = ProjectionKind::ito_vector;
      f.mode = MetricMode::hellinger;
      break;
    case FilterId::jet_l2:
      f.is_projection = true;
      f.kind = ProjectionKind::ito_jet;
      f.mode = MetricMode::direct;
      break;
    case FilterId::jet_hell:
      f.is_projection = true;
      f.kind = ProjectionKind::ito_jet;
      f.mode = MetricMode::hellinger;
      break;
    default:
      break;
  }
  return f;
}

}  // namespace

RunResult run_single_seed(const ScenarioConfig& config, std::uint64_t seed) {
  const FilterModel model = make_model(config);
  const GaussianFamily family;
  const GaussHermiteRule rule = gauss_hermite_rule(config.quadrature_order);
  const auto steps = static_cast<long>(std::llround(config.horizon / config.dt));
  const double dt = config.dt;
  const double sqrt_dt = std::sqrt(dt);

  // streams: 0 = signal noise, 1 = observation noise, 2 = prior draw
  const CounterRng signal_rng = CounterRng::derive(seed, 0);
  const CounterRng obs_rng = CounterRng::derive(seed, 1);
  const CounterRng init_rng = CounterRng::derive(seed, 2);

  // signal and observation increments
  double x_signal = config.prior_mean + config.prior_sd * init_rng.normal(0);
  std::vector<double> increments(static_cast<std::size_t>(steps));
  std::uint64_t checksum = 0xcbf29ce484222325ULL;
  {
    double x = x_signal;
    for (long k = 0; k < steps; ++k) {
      const double t = k * dt;
      const double dY =
          model.observation(x, t) * dt +
          sqrt_dt * obs_rng.normal(static_cast<std::uint64_t>(k));
      increments[static_cast<std::size_t>(k)] = dY;
      checksum = fnv1a64(&dY, sizeof(dY), checksum);
      x += model.drift(x, t) * dt +
           model.diffusion(x, t) * sqrt_dt *
               signal_rng.normal(static_cast<std::uint64_t>(k));
    }
  }

  RunResult result;
  result.seed = seed;
  result.dy_checksum = checksum;
  result.times.resize(static_cast<std::size_t>(steps) + 1);
  for (long k = 0; k <= steps; ++k) {
    result.times[static_cast<std::size_t>(k)] = k * dt;
  }

  // reference solver
  VectorXd prior_theta(2);
  prior_theta << config.prior_mean, config.prior_sd;
  GridDensity grid = make_grid_density(
      config.grid_half_width, config.grid_points,
      [&](double x) { return family.density(prior_theta, x); });
  grid.boundary_tolerance = config.grid_boundary_tolerance;

  std::vector<LiveFilter> live;
  live.reserve(config.filters.size());
  for (FilterId id : config.filters) live.push_back(make_live_filter(id, config));
  result.series.resize(live.size());
  for (std::size_t i = 0; i < live.size(); ++i) result.series[i].id = live[i].id;

  const double kalman_beta = model.observation_dx(0.0, 0.0);
  const double kalman_sigma = model.diffusion(0.0, 0.0);

  bool reference_alive = true;
  const auto record = [&](std::size_t index) {
    if (reference_alive) {
      const auto [ref_mean, ref_var] = grid_moments(grid);
      result.reference_moments.push_back(
          {ref_mean, std::sqrt(std::max(ref_var, 0.0))});
    }
    for (std::size_t i = 0; i < live.size(); ++i) {
      if (!live[i].alive || result.series[i].params.size() > index) continue;
      const std::array<double, 2> params = live[i].params();
      result.series[i].params.push_back(params);
      if (reference_alive) {
        VectorXd theta(2);
        theta << params[0], params[1];
        result.series[i].res_l2.push_back(
            residual(grid, family, theta, ResidualMode::l2));
        result.series[i].res_hell.push_back(
            residual(grid, family, theta, ResidualMode::hellinger));
      }
    }
  };

  record(0);
  for (long k = 0; k < steps; ++k) {
    const double t = k * dt;
    const double dY = increments[static_cast<std::size_t>(k)];

    if (reference_alive) {
      try {
        fd_ks_step(model, grid, t, dt, dY);
      } catch (const Error&) {
        reference_alive = false;
        result.reference_truncated = true;
      }
    }

    for (auto& f : live) {
      if (!f.alive) continue;
      try {
        if (f.is_projection) {
          f.state = projection_filter_step(model, family, f.state, dt, dY,
                                           f.kind, f.mode, rule);
        } else if (f.id == FilterId::kalman) {
          f.moments = kalman_step(kalman_beta, kalman_sigma, f.moments, dt, dY);
        } else if (f.id == FilterId::ekf) {
          f.moments = ekf_step(model, f.moments, dt, dY, t);
        } else {
          f.moments = gaussian_adf_step(model, f.moments, dt, dY, rule, t);
        }
      } catch (const Error& err) {
        f.alive = false;
        f.failure = err.what();
      }
    }
    record(static_cast<std::size_t>(k) + 1);
  }

  for (std::size_t i = 0; i < live.size(); ++i) {
    result.series[i].truncated = !live[i].alive;
    result.series[i].truncation_reason = live[i].failure;
  }
  return result;
}

namespace {

void write_run_csv(const std::string& path, const ScenarioConfig& config,
                   const RunResult& run) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write CSV file '" + path + "'");
  char checksum_hex[24];
  std::snprintf(checksum_hex, sizeof(checksum_hex), "%016llx",
                static_cast<unsigned long long>(run.dy_checksum));
  out << "# projfilt stem=" << config.stem << " seed=" << run.seed
      << " dy_fnv1a=" << checksum_hex << "\n";
  out << "t";
  for (const auto& series : run.series) {
    const std::string name = filter_name(series.id);
    out << "," << name << ".mean," << name << ".sd," << name << ".res_l2,"
        << name << ".res_hell";
  }
  out << ",ref.mean,ref.sd\n";

  for (std::size_t k = 0; k < run.times.size(); ++k) {
    out << format_double(run.times[k]);
    for (const auto& series : run.series) {
      if (series.alive_at(k)) {
        out << "," << format_double(series.params[k][0]) << ","
            << format_double(series.params[k][1]);
        if (k < series.res_l2.size()) {
          out << "," << format_double(series.res_l2[k]) << ","
              << format_double(series.res_hell[k]);
        } else {
          out << ",,";
        }
      } else {
        out << ",,,,";
      }
    }
    if (k < run.reference_moments.size()) {
      out << "," << format_double(run.reference_moments[k][0]) << ","
          << format_double(run.reference_moments[k][1]);
    } else {
      out << ",,";
    }
    out << "\n";
  }
}

void write_summary_csv(const std::string& path, const ScenarioConfig& config,
                       const ScenarioOutput& output,
                       const SummaryTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write CSV file '" + path + "'");
  out << "# projfilt stem=" << config.stem
      << " summary seeds=" << output.runs.size() << "\n";
  out << "t";
  for (FilterId id : config.filters) {
    const std::string name = filter_name(id);
    out << "," << name << ".mean," << name << ".sd," << name << ".res_l2,"
        << name << ".res_hell";
  }
  out << "\n";
  for (std::size_t k = 0; k < table.times.size(); ++k) {
    out << format_double(table.times[k]);
    for (FilterId id : config.filters) {
      const auto& params = table.avg_params.at(id);
      const auto& res_l2 = table.avg_res_l2.at(id);
      const auto& res_hell = table.avg_res_hell.at(id);
      if (k < params.size() && !std::isnan(params[k][0])) {
        out << "," << format_double(params[k][0]) << ","
            << format_double(params[k][1]);
      } else {
        out << ",,";
      }
      if (k < res_l2.size() && !std::isnan(res_l2[k])) {
        out << "," << format_double(res_l2[k]) << ","
            << format_double(res_hell[k]);
      } else {
        out << ",,";
      }
    }
    out << "\n";
  }
}

}  // namespace

SummaryTable summarize(const ScenarioOutput& output,
                       const ScenarioConfig& config) {
  SummaryTable table;
  if (output.runs.empty()) return table;
  table.times = output.runs.front().times;
  const std::size_t n_times = table.times.size();

  for (std::size_t fi = 0; fi < config.filters.size(); ++fi) {
    const FilterId id = config.filters[fi];
    std::vector<double> sum_l2(n_times, 0.0), sum_hell(n_times, 0.0);
    std::vector<std::array<double, 2>> sum_params(n_times, {0.0, 0.0});
    std::vector<int> res_counts(n_times, 0), param_counts(n_times, 0);
    for (const RunResult& run : output.runs) {
      const FilterSeries& series = run.series[fi];
      for (std::size_t k = 0; k < n_times; ++k) {
        if (series.alive_at(k)) {
          sum_params[k][0] += series.params[k][0];
          sum_params[k][1] += series.params[k][1];
          ++param_counts[k];
        }
        if (k < series.res_l2.size()) {
          sum_l2[k] += series.res_l2[k];
          sum_hell[k] += series.res_hell[k];
          ++res_counts[k];
        }
      }
    }
    std::vector<double> avg_l2(n_times), avg_hell(n_times);
    std::vector<std::array<double, 2>> avg_params(n_times);
    std::vector<int> counts(n_times);
    for (std::size_t k = 0; k < n_times; ++k) {
      counts[k] = res_counts[k];
      avg_l2[k] = res_counts[k] ? sum_l2[k] / res_counts[k]
                                : std::numeric_limits<double>::quiet_NaN();
      avg_hell[k] = res_counts[k] ? sum_hell[k] / res_counts[k]
                                  : std::numeric_limits<double>::quiet_NaN();
      if (param_counts[k]) {
        avg_params[k] = {sum_params[k][0] / param_counts[k],
                         sum_params[k][1] / param_counts[k]};
      } else {
        avg_params[k] = {std::numeric_limits<double>::quiet_NaN(),
                         std::numeric_limits<double>::quiet_NaN()};
      }
    }
    table.avg_res_l2[id] = std::move(avg_l2);
    table.avg_res_hell[id] = std::move(avg_hell);
    table.avg_params[id] = std::move(avg_params);
    table.alive_counts[id] = std::move(counts);
  }
  return table;
}

ScenarioOutput run_scenario(const ScenarioConfig& config, bool write_csv) {
  validate_config(config);
  ScenarioOutput output;
  output.runs.resize(config.seeds.size());

  int threads = config.threads > 0
                    ? config.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads,
                                      static_cast<int>(config.seeds.size())));

  if (threads == 1) {
    for (std::size_t i = 0; i < config.seeds.size(); ++i) {
      output.runs[i] = run_single_seed(config, config.seeds[i]);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&]() {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= config.seeds.size()) return;
          output.runs[i] = run_single_seed(config, config.seeds[i]);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  if (write_csv) {
    const std::string dir = resolve_out_dir(config);
    std::filesystem::create_directories(dir);
    for (const RunResult& run : output.runs) {
      const std::string path =
          dir + "/" + config.stem + "_seed" + std::to_string(run.seed) + ".csv";
      write_run_csv(path, config, run);
      output.csv_paths.push_back(path);
    }
    const SummaryTable table = summarize(output, config);
    output.summary_path = dir + "/" + config.stem + "_summary.csv";
    write_summary_csv(output.summary_path, config, output, table);
  }
  return output;
}

EpsilonSweepResult epsilon_sweep(const ScenarioConfig& config, bool write_csv) {
  if (config.sweep_epsilons.empty()) {
    throw ConfigError("sweep needs a list of epsilons");
  }
  const GaussianFamily family;
  const GaussHermiteRule rule = gauss_hermite_rule(config.quadrature_order);
  VectorXd theta(2);
  theta << config.prior_mean, config.prior_sd;

  EpsilonSweepResult result;
  result.epsilons = config.sweep_epsilons;
  result.gaps["jet"] = {};
  result.gaps["vector"] = {};
  result.gaps["strat"] = {};

  for (double eps : config.sweep_epsilons) {
    const FilterModel model = cubic_sensor_model(eps);
    const VectorXd reference = adf_chart_drift(model, theta, rule);
    const auto jet = projection_filter_coefficients(
        model, family, theta, 0.0, ProjectionKind::ito_jet,
        MetricMode::hellinger, rule);
    const auto vec = projection_filter_coefficients(
        model, family, theta, 0.0, ProjectionKind::ito_vector,
        MetricMode::hellinger, rule);
    const auto strat = projection_filter_coefficients(
        model, family, theta, 0.0, ProjectionKind::stratonovich,
        MetricMode::hellinger, rule);
    result.gaps["jet"].push_back((jet.stated_drift - reference).norm());
    result.gaps["vector"].push_back((vec.stated_drift - reference).norm());
    // the Stratonovich filter's drift coefficient is the drift of its
    // equation as written, i.e. in Stratonovich form
    result.gaps["strat"].push_back((strat.stated_drift - reference).norm());
  }

  for (auto& [name, gaps] : result.gaps) {
    std::vector<double> eps_fit, gap_fit;
    bool exact = true;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      if (gaps[i] > 1e-12) exact = false;
      if (result.epsilons[i] > 0.0 && gaps[i] > 1e-14) {
        eps_fit.push_back(result.epsilons[i]);
        gap_fit.push_back(gaps[i]);
      }
    }
    result.exact_match[name] = exact;
    result.slopes[name] =
        (exact || eps_fit.size() < 2)
            ? std::numeric_limits<double>::quiet_NaN()
            : log_log_slope(eps_fit, gap_fit);
  }

  if (write_csv) {
    const std::string dir = resolve_out_dir(config);
    std::filesystem::create_directories(dir);
    const std::string path = dir + "/" + config.stem + "_sweep.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write CSV file '" + path + "'");
    out << "epsilon,gap_jet,gap_vector,gap_strat\n";
    for (std::size_t i = 0; i < result.epsilons.size(); ++i) {
      out << format_double(result.epsilons[i]) << ","
          << format_double(result.gaps["jet"][i]) << ","
          << format_double(result.gaps["vector"][i]) << ","
          << format_double(result.gaps["strat"][i]) << "\n";
    }
  }
  return result;
}

ProbeOrdersResult probe_orders(const ScenarioConfig& config, bool write_csv) {
  const Embedding circle = circle_embedding(1.0);
  ItoSde ambient;
  ambient.dim = 2;
  ambient.num_noises = 2;
  ambient.drift = [](const VectorXd&, double) { return VectorXd::Zero(2); };
  ambient.diffusion = [](const VectorXd&, double) {
    return MatrixXd::Identity(2, 2);
  };
  ambient.diffusion_jacobian = [](const VectorXd&, double) {
    return std::vector<MatrixXd>(2, MatrixXd::Zero(2, 2));
  };
  VectorXd theta0(1);
  theta0 << 0.0;

  OrderProbeConfig probe;
  probe.horizons = config.probe_horizons;
  probe.trials = config.probe_trials;
  probe.substeps = config.probe_substeps;
  probe.seed = config.probe_seed;

  ProbeOrdersResult result;
  for (ProjectionKind kind : config.probe_kinds) {
    result.by_kind.emplace_back(
        kind, order_probe_all(ambient, circle, kind, theta0, probe));
  }

  if (write_csv) {
    const std::string dir = resolve_out_dir(config);
    std::filesystem::create_directories(dir);
    const std::string path = dir + "/" + config.stem + "_probe.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write CSV file '" + path + "'");
    out << "kind,criterion,horizon,error\n";
    for (const auto& [kind, res] : result.by_kind) {
      const std::string kname = projection_kind_name(kind);
      for (std::size_t i = 0; i < res.horizons.size(); ++i) {
        out << kname << ",strong_ambient," << format_double(res.horizons[i])
            << "," << format_double(res.strong_ambient.errors[i]) << "\n";
        out << kname << ",weak_ambient," << format_double(res.horizons[i])
            << "," << format_double(res.weak_ambient.errors[i]) << "\n";
        out << kname << ",strong_metric_projection,"
            << format_double(res.horizons[i]) << ","
            << format_double(res.strong_metric_projection.errors[i]) << "\n";
      }
    }
    const std::string slopes_path = dir + "/" + config.stem + "_probe_slopes.csv";
    std::ofstream slopes(slopes_path, std::ios::binary);
    slopes << "kind,criterion,slope,degenerate\n";
    for (const auto& [kind, res] : result.by_kind) {
      const std::string kname = projection_kind_name(kind);
      const auto row = [&](const char* criterion, const CriterionTable& table) {
        slopes << kname << "," << criterion << ","
               << format_double(table.slope) << "," << (table.degenerate ? 1 : 0)
               << "\n";
      };
      row("strong_ambient", res.strong_ambient);
      row("weak_ambient", res.weak_ambient);
      row("strong_metric_projection", res.strong_metric_projection);
    }
  }
  return result;
}

}  // namespace projfilt
