#include "ste/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace ste {

namespace {

using ordered_json = nlohmann::ordered_json;
constexpr double kPi = 3.14159265358979323846;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> linspace(double lo, double hi, int steps) {
  if (hi == lo) return {lo};
  std::vector<double> v(steps + 1);
  for (int i = 0; i <= steps; ++i) v[i] = lo + (hi - lo) * i / steps;
  return v;
}

void atomic_write(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out << contents;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::optional<AtomBasisLabel> label_from(const std::string& name) {
  if (name == "ee") return AtomBasisLabel::EE;
  if (name == "eg") return AtomBasisLabel::EG;
  if (name == "ge") return AtomBasisLabel::GE;
  if (name == "gg") return AtomBasisLabel::GG;
  return std::nullopt;
}

struct FigurePreset {
  AtomBasisLabel initial;
  int n;
};

std::optional<FigurePreset> figure_preset(const std::string& name) {
  if (name == "fig2a") return FigurePreset{AtomBasisLabel::EE, 1};
  if (name == "fig2b") return FigurePreset{AtomBasisLabel::EE, 3};
  if (name == "fig3a") return FigurePreset{AtomBasisLabel::EG, 3};
  if (name == "fig3b") return FigurePreset{AtomBasisLabel::EG, 1};
  return std::nullopt;
}

CouplingParams params_from(const RunConfig& config) {
  if (config.gamma) return CouplingParams::from_gamma(config.g_drv, *config.gamma);
  return CouplingParams(config.g_drv, *config.g_stm);
}

// ---------------------------------------------------------------------------
// config handling

void apply_json_config(RunConfig& config, const ordered_json& j) {
  if (j.contains("command") && j["command"].get<std::string>() != config.command)
    throw ConfigError("config: file describes command '" +
                      j["command"].get<std::string>() + "', not '" + config.command + "'");
  if (j.contains("case")) {
    config.icase = j["case"].get<std::string>();
    config.state.reset();
  }
  if (j.contains("state")) {
    config.state = j["state"].get<std::array<double, 8>>();
    config.icase.reset();
  }
  if (j.contains("n")) config.n = j["n"].get<int>();
  if (j.contains("g_drv")) config.g_drv = j["g_drv"].get<double>();
  if (j.contains("g_stm")) {
    config.g_stm = j["g_stm"].get<double>();
    config.gamma.reset();
  }
  if (j.contains("gamma")) {
    config.gamma = j["gamma"].get<double>();
    config.g_stm.reset();
  }
  if (j.contains("t_min")) config.t_min = j["t_min"].get<double>();
  if (j.contains("t_max")) config.t_max = j["t_max"].get<double>();
  if (j.contains("t_steps")) config.t_steps = j["t_steps"].get<int>();
  if (j.contains("gamma_min")) config.gamma_min = j["gamma_min"].get<double>();
  if (j.contains("gamma_max")) config.gamma_max = j["gamma_max"].get<double>();
  if (j.contains("gamma_steps")) config.gamma_steps = j["gamma_steps"].get<int>();
  if (j.contains("engine")) config.engine = j["engine"].get<std::string>();
  if (j.contains("cutoff")) config.cutoff = j["cutoff"].get<int>();
  if (j.contains("preset")) config.preset = j["preset"].get<std::string>();
  if (j.contains("output")) config.output = j["output"].get<std::string>();
  if (j.contains("format")) config.format = j["format"].get<std::string>();
  if (j.contains("tolerance")) config.tolerance = j["tolerance"].get<double>();
  if (j.contains("grid")) config.grid_path = j["grid"].get<std::string>();
}

GridSpec grid_from_json(const ordered_json& j) {
  GridSpec grid;
  if (j.contains("version")) grid.version = j["version"].get<std::string>();
  if (j.contains("cases")) {
    grid.cases.clear();
    for (const auto& name : j["cases"]) {
      const auto label = label_from(name.get<std::string>());
      if (!label) throw ConfigError("grid: unknown case '" + name.get<std::string>() + "'");
      grid.cases.push_back(*label);
    }
  }
  if (j.contains("n")) grid.ns = j["n"].get<std::vector<int>>();
  if (j.contains("gamma")) grid.gammas = j["gamma"].get<std::vector<double>>();
  if (j.contains("t_points")) grid.t_points = j["t_points"].get<int>();
  if (j.contains("t_min")) grid.t_min = j["t_min"].get<double>();
  if (j.contains("t_max")) grid.t_max = j["t_max"].get<double>();
  if (j.contains("g_drv")) grid.g_drv = j["g_drv"].get<double>();
  if (grid.t_points < 2) throw ConfigError("grid: t_points must be >= 2");
  return grid;
}

bool command_takes_couplings(const std::string& cmd) {
  return cmd == "evolve" || cmd == "period";
}
bool command_is_report(const std::string& cmd) {
  return cmd == "critical" || cmd == "period" || cmd == "validate";
}
bool command_takes_case(const std::string& cmd) {
  return cmd == "evolve" || cmd == "sweep" || cmd == "critical" || cmd == "period";
}

}  // namespace

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read file '" + path + "'");
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (j.contains("config")) j = j["config"];  // manifest replay
  apply_json_config(config, j);
}

void validate_config(RunConfig& config) {
  if (config.n < 0) throw ConfigError("n: must be >= 0");
  if (!(config.g_drv > 0.0)) throw ConfigError("g-drv: must be > 0");

  if (config.command == "figure") {
    const auto preset = figure_preset(config.preset);
    if (!preset) throw ConfigError("preset: unknown preset '" + config.preset + "'");
    config.icase = preset->initial == AtomBasisLabel::EE ? "ee" : "eg";
    config.n = preset->n;
    config.gamma_min = 0.0;
    config.gamma_max = 1.0;
    config.gamma_steps = 100;
    config.t_min = 0.0;
    config.t_max = 4.0 * kPi;
    config.t_steps = 400;
    if (config.engine.empty()) config.engine = "closed-form";
  }

  if (command_takes_case(config.command)) {
    const bool has_case = config.icase.has_value();
    const bool has_state = config.state.has_value();
    if (config.command == "evolve" || config.command == "sweep") {
      if (has_case == has_state)
        throw ConfigError("case: exactly one of --case/--state must be supplied");
    } else if (!has_case) {
      throw ConfigError("case: required for " + config.command);
    }
    if (has_case && !label_from(*config.icase))
      throw ConfigError("case: must be one of ee, eg, ge, gg");
    if ((config.command == "critical" || config.command == "period") &&
        *config.icase != "ee" && *config.icase != "eg")
      throw ConfigError("case: " + config.command + " supports ee and eg only");
    if (has_state) {
      double norm = 0.0;
      for (int k = 0; k < 4; ++k)
        norm += (*config.state)[2 * k] * (*config.state)[2 * k] +
                (*config.state)[2 * k + 1] * (*config.state)[2 * k + 1];
      if (std::abs(norm - 1.0) > 1e-12)
        throw ConfigError("state: atomic amplitudes must be normalized");
    }
  }

  if (command_takes_couplings(config.command)) {
    if (config.g_stm.has_value() == config.gamma.has_value())
      throw ConfigError("gamma: exactly one of --g-stm/--gamma must be supplied");
    if (config.gamma && !(*config.gamma > -1.0 && *config.gamma <= 1.0))
      throw ConfigError("gamma: must lie in (-1, 1]");
    if (config.g_stm && !(*config.g_stm >= 0.0))
      throw ConfigError("g-stm: must be >= 0");
  }

  if (config.command == "evolve" || config.command == "sweep" ||
      config.command == "figure") {
    if (!(config.t_min >= 0.0)) throw ConfigError("t-min: must be >= 0");
    if (!(config.t_max >= config.t_min)) throw ConfigError("t-max: must be >= t-min");
    if (config.t_steps < 1) throw ConfigError("t-steps: must be >= 1");
    if (config.command != "evolve") {
      if (!(config.gamma_max >= config.gamma_min))
        throw ConfigError("gamma-max: must be >= gamma-min");
      if (!(config.gamma_min > -1.0 && config.gamma_max <= 1.0))
        throw ConfigError("gamma-min: grid must lie in (-1, 1]");
      if (config.gamma_steps < 1) throw ConfigError("gamma-steps: must be >= 1");
    }
    if (config.engine.empty())
      config.engine = config.command == "figure" ? "closed-form" : "block";
    const auto engine = engine_from_name(config.engine);
    if (!engine) throw ConfigError("engine: must be closed-form, block or oracle");
    if (*engine == Engine::ClosedForm && config.icase && *config.icase != "ee" &&
        *config.icase != "eg")
      throw ConfigError("engine: closed-form supports ee and eg only");
    if (config.state && *engine != Engine::Block)
      throw ConfigError("engine: --state requires the block engine");
    if (config.format.empty()) config.format = "csv";
    if (config.format != "csv" && config.format != "json")
      throw ConfigError("format: must be csv or json");
  } else {
    if (config.format.empty()) config.format = "json";
    if (config.format != "json")
      throw ConfigError("format: " + config.command + " reports are json only");
  }

  if (config.cutoff && *config.cutoff < config.n + 4)
    throw ConfigError("cutoff: must be >= n + 4");
  if (config.command == "validate" && !(config.tolerance > 0.0))
    throw ConfigError("tolerance: must be > 0");

  if (config.output.empty()) {
    if (config.command == "figure")
      config.output = config.preset + ".csv";
    else if (command_is_report(config.command))
      config.output = config.command + ".json";
    else
      config.output = config.command + "." + config.format;
  }
}

std::string config_to_json(const RunConfig& config) {
  ordered_json j;
  j["command"] = config.command;
  if (config.icase) j["case"] = *config.icase;
  if (config.state) j["state"] = *config.state;
  if (config.icase || config.state) j["n"] = config.n;
  j["g_drv"] = config.g_drv;
  if (config.g_stm) j["g_stm"] = *config.g_stm;
  if (config.gamma) j["gamma"] = *config.gamma;
  if (config.command == "evolve" || config.command == "sweep" ||
      config.command == "figure") {
    j["t_min"] = config.t_min;
    j["t_max"] = config.t_max;
    j["t_steps"] = config.t_steps;
    if (config.command != "evolve") {
      j["gamma_min"] = config.gamma_min;
      j["gamma_max"] = config.gamma_max;
      j["gamma_steps"] = config.gamma_steps;
    }
    j["engine"] = config.engine;
  }
  if (config.cutoff) j["cutoff"] = *config.cutoff;
  if (!config.preset.empty()) j["preset"] = config.preset;
  j["output"] = config.output;
  j["format"] = config.format;
  if (config.command == "validate") {
    j["tolerance"] = config.tolerance;
    if (config.grid_path) j["grid"] = *config.grid_path;
  }
  return j.dump();
}

namespace {

// ---------------------------------------------------------------------------
// manifest

struct RunContext {
  std::vector<std::string> engines;
  std::vector<std::string> conventions;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

void write_manifest(const RunConfig& config, const RunContext& ctx) {
  ordered_json m;
  m["tool"] = kToolName;
  m["version"] = kToolVersion;
  m["command"] = config.command;
  m["config"] = ordered_json::parse(config_to_json(config));
  m["engine_tags"] = ctx.engines;
  ordered_json tol;
  tol["entangled_threshold"] = kEntangledThreshold;
  tol["zero_threshold"] = kZeroThreshold;
  if (config.command == "validate") tol["validation_tolerance"] = config.tolerance;
  m["tolerances"] = tol;
  m["conventions"] = ctx.conventions;
  // floored to whole seconds so fast reruns stay byte-identical
  const auto elapsed = std::chrono::steady_clock::now() - ctx.start;
  m["wall_time_seconds"] =
      std::chrono::duration_cast<std::chrono::seconds>(elapsed).count();
  m["output"] = config.output;
  atomic_write(config.output + ".manifest.json", m.dump(2) + "\n");
}

void note_convention(RunContext& ctx, const std::string& tag) {
  for (const auto& existing : ctx.conventions)
    if (existing == tag) return;
  ctx.conventions.push_back(tag);
}

const char* kTraceConvention =
    "partial-trace: reduced states sum over every photon sector of the field";
const char* kThetaConvention =
    "theta-normalization: propagator theta entries carry 1/Omega^2";
const char* kPeriodScaleConvention =
    "period-scale: entanglement periods carry the total coupling g_drv + g_stm";
const char* kEeGamma0Convention =
    "ee-gamma0: at gamma = 0 the ee concurrence is an exact sine square and its "
    "period halves to pi/(g xi)";

// ---------------------------------------------------------------------------
// table emission (CSV or JSON rows)

std::string render_table(const RunConfig& config, const std::vector<std::string>& columns,
                         const std::vector<std::vector<double>>& rows) {
  if (config.format == "json") {
    ordered_json j;
    j["columns"] = columns;
    auto& out_rows = j["rows"] = ordered_json::array();
    for (const auto& row : rows) out_rows.push_back(row);
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  for (std::size_t c = 0; c < columns.size(); ++c)
    out << (c ? "," : "") << columns[c];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      out << (c ? "," : "") << fmt17(row[c]);
    out << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// commands

void run_evolve(const RunConfig& config, RunContext& ctx) {
  const CouplingParams params = params_from(config);
  const Engine engine = *engine_from_name(config.engine);
  ctx.engines.push_back(config.engine);
  note_convention(ctx, kTraceConvention);
  if (engine == Engine::ClosedForm) note_convention(ctx, kThetaConvention);

  const std::vector<double> times = linspace(config.t_min, config.t_max, config.t_steps);
  const int cutoff = config.cutoff.value_or(config.n + kDefaultCutoffMargin);

  std::optional<OracleEvolver> oracle;
  if (engine == Engine::Oracle) oracle.emplace(params, cutoff);
  std::optional<Eigen::Vector4cd> state;
  if (config.state) {
    Eigen::Vector4cd v;
    for (int k = 0; k < 4; ++k)
      v(k) = {(*config.state)[2 * k], (*config.state)[2 * k + 1]};
    state = v;
  }
  const AtomBasisLabel initial =
      config.icase ? *label_from(*config.icase) : AtomBasisLabel::EE;

  std::vector<std::vector<double>> rows;
  rows.reserve(times.size());
  for (double t : times) {
    DensityMatrix4 rho{};
    double conc;
    if (engine == Engine::ClosedForm) {
      const XState x = initial == AtomBasisLabel::EE
                           ? reduced_xstate_ee(params, config.n, t)
                           : reduced_xstate_eg(params, config.n, t);
      rho = DensityMatrix4{to_matrix(x)};
      conc = concurrence_x(x);
    } else {
      rho = oracle ? oracle->reduced_at(initial, config.n, t)
            : state ? reduced_general(params, *state, config.n, t)
                    : reduced_general(params, initial, config.n, t);
      conc = concurrence_general(rho);
    }
    const auto el = xstate_elements(rho);
    rows.push_back({t, el[0], el[1], el[2], el[3], el[4], conc, negativity(rho)});
  }
  atomic_write(config.output,
               render_table(config, {"t", "A", "B", "C", "D", "E", "concurrence",
                                     "negativity"}, rows));
}

void run_sweep(const RunConfig& config, RunContext& ctx) {
  const Engine engine = *engine_from_name(config.engine);
  ctx.engines.push_back(config.engine);
  note_convention(ctx, kTraceConvention);
  if (engine == Engine::ClosedForm) note_convention(ctx, kThetaConvention);

  SweepSpec spec;
  if (config.state) {
    Eigen::Vector4cd v;
    for (int k = 0; k < 4; ++k)
      v(k) = {(*config.state)[2 * k], (*config.state)[2 * k + 1]};
    spec.state = v;
  } else {
    spec.initial = *label_from(*config.icase);
  }
  spec.n = config.n;
  spec.g_drv = config.g_drv;
  spec.gamma_grid = linspace(config.gamma_min, config.gamma_max, config.gamma_steps);
  spec.t_grid = linspace(config.t_min, config.t_max, config.t_steps);
  spec.engine = engine;
  spec.cutoff = config.cutoff.value_or(-1);

  const SweepResult result = sweep(spec);
  std::vector<std::vector<double>> rows;
  rows.reserve(spec.gamma_grid.size() * spec.t_grid.size());
  for (std::size_t i = 0; i < spec.gamma_grid.size(); ++i)
    for (std::size_t j = 0; j < spec.t_grid.size(); ++j)
      rows.push_back({spec.gamma_grid[i], spec.t_grid[j], result.conc(i, j),
                      result.neg(i, j)});
  atomic_write(config.output,
               render_table(config, {"gamma", "t", "concurrence", "negativity"}, rows));
}

void run_critical(const RunConfig& config, RunContext&) {
  const CriticalPoint cp = critical_point(*label_from(*config.icase), config.n);
  ordered_json j;
  j["case"] = *config.icase;
  j["n"] = cp.n;
  j["gamma_crit"] = cp.gamma_crit;
  j["g_stm_crit"] = cp.g_stm_crit;
  atomic_write(config.output, j.dump(2) + "\n");
}

void run_period(const RunConfig& config, RunContext& ctx) {
  const CouplingParams params = params_from(config);
  const AtomBasisLabel initial = *label_from(*config.icase);
  ctx.engines.push_back("closed-form");
  ctx.engines.push_back("oracle");

  ordered_json j;
  j["case"] = *config.icase;
  j["n"] = config.n;
  j["gamma"] = params.gamma();

  std::string reason;
  const auto analytic =
      period(initial, params, config.n, PeriodMethod::AnalyticXi, &reason);
  if (!analytic) {
    j["period"] = nullptr;
    j["reason"] = reason;
    atomic_write(config.output, j.dump(2) + "\n");
    return;
  }
  const auto measured =
      period(initial, params, config.n, PeriodMethod::ZeroCrossing, &reason);
  if (!measured)
    throw ToleranceError("period: zero-crossing search failed (" + reason +
                         ") where the analytic method found " +
                         fmt17(analytic->period));

  const double rel =
      std::abs(measured->period - analytic->period) / analytic->period;
  note_convention(ctx, kPeriodScaleConvention);
  if (initial == AtomBasisLabel::EE && params.gamma() == 0.0)
    note_convention(ctx, kEeGamma0Convention);

  j["period"] = measured->period;
  j["method"] = "zero-crossing";
  j["analytic_xi_period"] = analytic->period;
  j["zero_crossing_period"] = measured->period;
  j["relative_agreement"] = rel;
  atomic_write(config.output, j.dump(2) + "\n");
  if (rel > 1e-6)
    throw ToleranceError("period: methods disagree by relative " + fmt17(rel));
}

ordered_json grid_to_json(const GridSpec& grid) {
  ordered_json g;
  g["version"] = grid.version;
  std::vector<std::string> cases;
  for (AtomBasisLabel c : grid.cases)
    cases.push_back(c == AtomBasisLabel::EE   ? "ee"
                    : c == AtomBasisLabel::EG ? "eg"
                    : c == AtomBasisLabel::GE ? "ge"
                                              : "gg");
  g["cases"] = cases;
  g["n"] = grid.ns;
  g["gamma"] = grid.gammas;
  g["t_points"] = grid.t_points;
  g["t_min"] = grid.t_min;
  g["t_max"] = grid.t_max;
  g["g_drv"] = grid.g_drv;
  return g;
}

void run_validate(const RunConfig& config, RunContext& ctx) {
  ctx.engines = {"closed-form", "block", "oracle"};
  note_convention(ctx, kTraceConvention);
  note_convention(ctx, kThetaConvention);
  GridSpec grid = GridSpec::standard();
  if (config.grid_path) {
    std::ifstream in(*config.grid_path);
    if (!in) throw ConfigError("grid: cannot read file '" + *config.grid_path + "'");
    ordered_json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("grid: invalid JSON: ") + e.what());
    }
    grid = grid_from_json(j);
  }
  const ValidationReport report = validate_analytic(grid, config.tolerance);

  ordered_json j;
  j["grid"] = grid_to_json(grid);
  j["tolerance"] = report.tolerance;
  ordered_json dev;
  const char* names[5] = {"A", "B", "C", "D", "E"};
  for (int e = 0; e < 5; ++e) dev[names[e]] = report.max_element_deviation[e];
  dev["concurrence"] = report.max_concurrence_deviation;
  dev["propagator"] = report.max_propagator_deviation;
  j["max_deviation"] = dev;
  j["max_overall"] = report.max_overall;
  auto& outliers = j["outliers"] = ordered_json::array();
  for (const auto& o : report.outliers) {
    ordered_json row;
    row["case"] = o.initial == AtomBasisLabel::EE   ? "ee"
                  : o.initial == AtomBasisLabel::EG ? "eg"
                                                    : "gg";
    row["n"] = o.n;
    row["gamma"] = o.gamma;
    row["t"] = o.t;
    row["element"] = o.element;
    row["deviation"] = o.deviation;
    outliers.push_back(row);
  }
  j["pass"] = report.pass;
  atomic_write(config.output, j.dump(2) + "\n");
  if (!report.pass)
    throw ToleranceError("validate: max deviation " + fmt17(report.max_overall) +
                         " exceeds tolerance " + fmt17(report.tolerance));
}

}  // namespace

int run_command(RunConfig config, std::ostream& err) {
  RunContext ctx;
  try {
    validate_config(config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    if (config.command == "evolve")
      run_evolve(config, ctx);
    else if (config.command == "sweep" || config.command == "figure")
      run_sweep(config, ctx);
    else if (config.command == "critical")
      run_critical(config, ctx);
    else if (config.command == "period")
      run_period(config, ctx);
    else if (config.command == "validate")
      run_validate(config, ctx);
    else {
      err << "config error: unknown command '" << config.command << "'\n";
      return kExitConfig;
    }
    write_manifest(config, ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ToleranceError& e) {
    // report file already written; the exit code flags the failure
    write_manifest(config, ctx);
    err << "tolerance failure: " << e.what() << "\n";
    return kExitTolerance;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}

}  // namespace ste
