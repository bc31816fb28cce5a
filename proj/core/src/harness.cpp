#include "smap/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "smap/errors.hpp"

namespace smap {

namespace fs = std::filesystem;
using nlohmann::json;

std::string output_root() {
  const char* env = std::getenv("SMAP_OUTPUT_ROOT");
  return env && *env ? std::string(env) : std::string("runs");
}

std::string to_string(InitialKind k) {
  switch (k) {
    case InitialKind::Blowup: return "blowup";
    case InitialKind::GroundState: return "ground_state";
    case InitialKind::Perturbed: return "perturbed";
    case InitialKind::RandomPacket: return "random_packet";
  }
  return "?";
}

InitialKind initial_kind_from_string(const std::string& s) {
  if (s == "blowup") return InitialKind::Blowup;
  if (s == "ground_state" || s == "ground-state") return InitialKind::GroundState;
  if (s == "perturbed") return InitialKind::Perturbed;
  if (s == "random_packet" || s == "random-packet") return InitialKind::RandomPacket;
  throw ConfigError("unknown initial data kind '" + s + "'");
}

std::string to_string(PlotKind k) {
  switch (k) {
    case PlotKind::RateRatio: return "rate-ratio";
    case PlotKind::Trajectory: return "trajectory";
    case PlotKind::TailCheck: return "tail-check";
  }
  return "?";
}

PlotKind plot_kind_from_string(const std::string& s) {
  if (s == "rate-ratio") return PlotKind::RateRatio;
  if (s == "trajectory") return PlotKind::Trajectory;
  if (s == "tail-check") return PlotKind::TailCheck;
  throw ConfigError("unknown plot kind '" + s + "'");
}

namespace {

// JSON has no infinities; they travel as strings.
json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double get_num(const json& j, const char* key, double fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  const auto& v = j[key];
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ConfigError(std::string("config key '") + key + "' is not a number");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

json grid_json(const GridSpec& g) {
  return {{"spacing", to_string(g.spacing)}, {"n", g.n}, {"r_max", g.r_max}, {"stretch", g.stretch}};
}

GridSpec grid_from(const json& j) {
  GridSpec g;
  if (j.contains("spacing")) {
    try {
      g.spacing = spacing_from_string(j["spacing"].get<std::string>());
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  g.n = get_or<std::size_t>(j, "n", g.n);
  g.r_max = get_num(j, "r_max", g.r_max);
  g.stretch = get_num(j, "stretch", g.stretch);
  return g;
}

json solver_json(const SolverConfig& c) {
  return {{"dt", c.dt},
          {"dt_factor", c.dt_factor},
          {"tolerance", c.tolerance},
          {"max_iterations", c.max_iterations},
          {"contraction_limit", c.contraction_limit},
          {"max_halvings", c.max_halvings},
          {"energy_drift_abort", c.energy_drift_abort},
          {"diagnostic_every", c.diagnostic_every},
          {"snapshot_interval", c.snapshot_interval},
          {"extract_modulation", c.extract_modulation}};
}

SolverConfig solver_from(const json& j) {
  SolverConfig c;
  c.dt = get_num(j, "dt", c.dt);
  c.dt_factor = get_num(j, "dt_factor", c.dt_factor);
  c.tolerance = get_num(j, "tolerance", c.tolerance);
  c.max_iterations = get_or(j, "max_iterations", c.max_iterations);
  c.contraction_limit = get_num(j, "contraction_limit", c.contraction_limit);
  c.max_halvings = get_or(j, "max_halvings", c.max_halvings);
  c.energy_drift_abort = get_num(j, "energy_drift_abort", c.energy_drift_abort);
  c.diagnostic_every = get_or(j, "diagnostic_every", c.diagnostic_every);
  c.snapshot_interval = get_num(j, "snapshot_interval", c.snapshot_interval);
  c.extract_modulation = get_or(j, "extract_modulation", c.extract_modulation);
  return c;
}

json stop_json(const StopSpec& s) {
  return {{"t_end", s.t_end},
          {"lambda_floor", s.lambda_floor ? json(*s.lambda_floor) : json(nullptr)},
          {"resolution_floor", s.resolution_floor}};
}

StopSpec stop_from(const json& j) {
  StopSpec s;
  s.t_end = get_num(j, "t_end", s.t_end);
  if (j.contains("lambda_floor") && !j["lambda_floor"].is_null()) s.lambda_floor = get_num(j, "lambda_floor", 0.0);
  s.resolution_floor = get_or(j, "resolution_floor", s.resolution_floor);
  return s;
}

json initdata_json(const BlowupDataSpec& s) {
  return {{"lambda0", s.lambda0},
          {"b0", s.b0},
          {"a0", s.a0},
          {"theta0", s.theta0},
          {"cutoff", s.cutoff ? json(*s.cutoff) : json(nullptr)},
          {"gauge", s.gauge == KernelGauge::Frobenius ? "frobenius" : "orthogonal"},
          {"b_ceiling", s.b_ceiling},
          {"smallness", s.smallness}};
}

BlowupDataSpec initdata_from(const json& j) {
  BlowupDataSpec s;
  s.lambda0 = get_num(j, "lambda0", s.lambda0);
  s.b0 = get_num(j, "b0", s.b0);
  s.a0 = get_num(j, "a0", s.a0);
  s.theta0 = get_num(j, "theta0", s.theta0);
  if (j.contains("cutoff") && !j["cutoff"].is_null()) s.cutoff = get_num(j, "cutoff", 0.0);
  const auto gauge = get_or<std::string>(j, "gauge", "frobenius");
  if (gauge == "frobenius") {
    s.gauge = KernelGauge::Frobenius;
  } else if (gauge == "orthogonal") {
    s.gauge = KernelGauge::OrthogonalToResonance;
  } else {
    throw ConfigError("unknown kernel gauge '" + gauge + "'");
  }
  s.b_ceiling = get_num(j, "b_ceiling", s.b_ceiling);
  s.smallness = get_num(j, "smallness", s.smallness);
  return s;
}

void check_grid(const GridSpec& g) {
  if (g.n < 4) throw ConfigError("grid: n must be at least 4");
  if (!(g.r_max > 0.0) || !std::isfinite(g.r_max)) throw ConfigError("grid: r_max must be positive");
  if (g.spacing == Spacing::GeometricStretch && !(g.stretch > 0.0 && std::isfinite(g.stretch))) {
    throw ConfigError("grid: stretch must be positive");
  }
  if (g.spacing == Spacing::Custom) throw ConfigError("grid: custom spacing cannot be configured");
}

void check_ode(const RunConfig& cfg) {
  const auto& p = cfg.model;
  const auto& s = cfg.ode_state;
  if (!(p.b_ceiling > 0.0 && p.b_ceiling < 1.0)) throw ConfigError("ode: b_ceiling must lie in (0, 1)");
  if (!std::isfinite(p.log_coefficient)) throw ConfigError("ode: log coefficient must be finite");
  if (!(s.lambda > 0.0) || !std::isfinite(s.lambda)) throw ConfigError("ode: lambda0 must be positive");
  if (!std::isfinite(s.a) || !std::isfinite(s.theta) || !std::isfinite(s.s) || !std::isfinite(s.t)) {
    throw ConfigError("ode: state must be finite");
  }
  if (!(s.b > 0.0 && s.b < p.b_ceiling)) throw ConfigError("ode: b0 must lie in (0, b_ceiling)");
  if (!(cfg.ode_stop.lambda_floor > 0.0 && cfg.ode_stop.lambda_floor < s.lambda)) {
    throw ConfigError("ode: lambda floor must lie in (0, lambda0)");
  }
  if (!(cfg.ode_stop.s_budget > 0.0)) throw ConfigError("ode: s budget must be positive");
  if (!(cfg.integrator.rtol > 0.0 && cfg.integrator.rtol < 1e-2)) throw ConfigError("ode: rtol must lie in (0, 1e-2)");
  if (!(cfg.integrator.initial_step > 0.0)) throw ConfigError("ode: initial step must be positive");
  if (cfg.integrator.max_steps == 0) throw ConfigError("ode: max_steps must be positive");
  if (!(cfg.fit.decades > 0.0)) throw ConfigError("fit: decades must be positive");
}

}  // namespace

void validate(const RunConfig& cfg) {
  const auto& c = cfg.command;
  if (c == "evolve") {
    check_grid(cfg.grid);
    validate(cfg.solver);
    if (!(cfg.stop.t_end > 0.0) || !std::isfinite(cfg.stop.t_end)) throw ConfigError("evolve: t_end must be positive");
    if (cfg.stop.lambda_floor && !(*cfg.stop.lambda_floor > 0.0)) {
      throw ConfigError("evolve: lambda floor must be positive");
    }
    if (cfg.degree == 0) throw ConfigError("evolve: degree must be non-zero");
    if (cfg.initial == InitialKind::Blowup) {
      if (cfg.degree != 1) throw ConfigError("evolve: blow-up data exist for degree 1 only");
      validate(cfg.initdata);
    }
    if (!(cfg.perturbation >= 0.0 && cfg.perturbation < 0.5)) {
      throw ConfigError("evolve: perturbation amplitude must lie in [0, 0.5)");
    }
  } else if (c == "ode" || c == "fit") {
    check_ode(cfg);
  } else if (c == "profiles") {
    check_grid(cfg.grid);
  } else if (c == "extract" || c == "verify") {
  } else {
    throw ConfigError("unknown command '" + c + "'");
  }
}

nlohmann::json to_json(const RunConfig& cfg) {
  json j;
  j["command"] = cfg.command;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["grid"] = grid_json(cfg.grid);
  j["solver"] = solver_json(cfg.solver);
  j["stop"] = stop_json(cfg.stop);
  j["initial"] = to_string(cfg.initial);
  j["degree"] = cfg.degree;
  j["perturbation"] = cfg.perturbation;
  j["initdata"] = initdata_json(cfg.initdata);
  j["ode"] = {{"lambda0", cfg.ode_state.lambda},
              {"b0", cfg.ode_state.b},
              {"a0", cfg.ode_state.a},
              {"theta0", cfg.ode_state.theta},
              {"variant", to_string(cfg.model.variant)},
              {"b_ceiling", cfg.model.b_ceiling},
              {"log_coefficient", cfg.model.log_coefficient},
              {"lambda_floor", cfg.ode_stop.lambda_floor},
              {"s_budget", num(cfg.ode_stop.s_budget)},
              {"rtol", cfg.integrator.rtol},
              {"initial_step", cfg.integrator.initial_step},
              {"max_steps", cfg.integrator.max_steps},
              {"fit_decades", cfg.fit.decades}};
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  RunConfig c;
  c.command = get_or<std::string>(j, "command", "");
  c.seed = get_or<std::uint64_t>(j, "seed", 0);
  c.output_dir = get_or<std::string>(j, "output_dir", "");
  if (j.contains("grid")) c.grid = grid_from(j["grid"]);
  if (j.contains("solver")) c.solver = solver_from(j["solver"]);
  if (j.contains("stop")) c.stop = stop_from(j["stop"]);
  if (j.contains("initial")) c.initial = initial_kind_from_string(j["initial"].get<std::string>());
  c.degree = get_or(j, "degree", c.degree);
  c.perturbation = get_num(j, "perturbation", c.perturbation);
  if (j.contains("initdata")) c.initdata = initdata_from(j["initdata"]);
  c.initdata.grid = c.grid;
  if (j.contains("ode")) {
    const auto& o = j["ode"];
    c.ode_state.lambda = get_num(o, "lambda0", c.ode_state.lambda);
    c.ode_state.b = get_num(o, "b0", c.ode_state.b);
    c.ode_state.a = get_num(o, "a0", c.ode_state.a);
    c.ode_state.theta = get_num(o, "theta0", c.ode_state.theta);
    if (o.contains("variant")) c.model.variant = mod_variant_from_string(o["variant"].get<std::string>());
    c.model.b_ceiling = get_num(o, "b_ceiling", c.model.b_ceiling);
    c.model.log_coefficient = get_num(o, "log_coefficient", c.model.log_coefficient);
    c.ode_stop.lambda_floor = get_num(o, "lambda_floor", c.ode_stop.lambda_floor);
    c.ode_stop.s_budget = get_num(o, "s_budget", c.ode_stop.s_budget);
    c.integrator.rtol = get_num(o, "rtol", c.integrator.rtol);
    c.integrator.initial_step = get_num(o, "initial_step", c.integrator.initial_step);
    c.integrator.max_steps = get_or<std::size_t>(o, "max_steps", c.integrator.max_steps);
    c.fit.decades = get_num(o, "fit_decades", c.fit.decades);
  }
  return c;
}

EquivariantProfile initial_profile(const RunConfig& cfg) {
  const RadialGrid grid = RadialGrid::from_spec(cfg.grid);
  switch (cfg.initial) {
    case InitialKind::Blowup: {
      BlowupDataSpec spec = cfg.initdata;
      spec.grid = cfg.grid;
      return build_blowup_data(spec, grid);
    }
    case InitialKind::GroundState:
      return harmonic_map(cfg.degree, grid);
    case InitialKind::Perturbed:
      return perturbed_ground_state(cfg.degree, grid, cfg.perturbation);
    case InitialKind::RandomPacket: {
      std::mt19937_64 rng(cfg.seed);
      std::uniform_real_distribution<double> centre(2.0, 5.0), width(0.5, 1.5), wave(1.0, 6.0);
      const double c = centre(rng);
      const double w = width(rng);
      const double k = wave(rng);
      return perturbed_ground_state(cfg.degree, grid, cfg.perturbation, c, w, k);
    }
  }
  throw ConfigError("unhandled initial data kind");
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 computation failed");
  }
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) out << std::setw(2) << static_cast<int>(md[i]);
  return out.str();
}

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open '" + p.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spill(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
  out << content;
  if (!out) throw IoError("failed writing '" + p.string() + "'");
}

std::string snapshot_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshots/%04zu.profile", i);
  return buf;
}

}  // namespace

std::string sha256_file(const std::string& path) { return sha256_hex(slurp(path)); }

std::string Manifest::digest() const {
  std::vector<std::pair<std::string, std::string>> rows;
  for (const auto& e : entries) rows.emplace_back(e.path, e.sha256);
  std::sort(rows.begin(), rows.end());
  std::string acc;
  for (const auto& [p, h] : rows) acc += p + ' ' + h + '\n';
  return sha256_hex(acc);
}

void write_diagnostics_csv(std::ostream& out, const std::vector<Diagnostic>& diagnostics) {
  out << "t,dt,energy,energy_trapezoid,norm_defect_before,norm_defect_after,iterations,lambda,theta\n";
  out << std::setprecision(17);
  for (const auto& d : diagnostics) {
    out << d.t << ',' << d.dt << ',' << d.energy << ',' << d.energy_trapezoid << ',' << d.norm_defect_before << ','
        << d.norm_defect_after << ',' << d.iterations << ',' << d.lambda << ',' << d.theta << '\n';
  }
}

std::vector<Diagnostic> read_diagnostics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,dt,", 0) != 0) throw IoError("diagnostics.csv: bad header");
  std::vector<Diagnostic> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> f;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw IoError("diagnostics.csv: bad cell '" + cell + "'");
      f.push_back(v);
    }
    if (f.size() != 9) throw IoError("diagnostics.csv: expected 9 columns");
    Diagnostic d;
    d.t = f[0];
    d.dt = f[1];
    d.energy = f[2];
    d.energy_trapezoid = f[3];
    d.norm_defect_before = f[4];
    d.norm_defect_after = f[5];
    d.iterations = static_cast<int>(f[6]);
    d.lambda = f[7];
    d.theta = f[8];
    out.push_back(d);
  }
  return out;
}

Manifest persist_run(const RunRecord& record, const RunConfig& config, const std::string& dir) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root / "snapshots", ec);
  if (ec) throw IoError("cannot create '" + (root / "snapshots").string() + "': " + ec.message());

  std::vector<std::string> files;
  spill(root / "config.json", to_json(config).dump(2) + "\n");
  files.push_back("config.json");

  json summary;
  summary["degree"] = record.degree;
  summary["solver"] = solver_json(record.config);
  summary["stop"] = stop_json(record.stop);
  summary["termination"] = record.termination;
  summary["steps"] = record.steps;
  summary["halvings"] = record.halvings;
  summary["max_norm_defect"] = record.max_norm_defect;
  summary["energy_drift"] = record.energy_drift;
  summary["energy_trapezoid_drift"] = record.energy_trapezoid_drift;
  summary["flags"] = record.flags;
  summary["snapshots"] = record.snapshots.size();
  summary["final_state"] = record.final_state.has_value();
  spill(root / "summary.json", summary.dump(2) + "\n");
  files.push_back("summary.json");

  std::ostringstream diag;
  write_diagnostics_csv(diag, record.diagnostics);
  spill(root / "diagnostics.csv", diag.str());
  files.push_back("diagnostics.csv");

  for (std::size_t i = 0; i < record.snapshots.size(); ++i) {
    std::ostringstream s;
    write_profile(s, record.snapshots[i]);
    spill(root / snapshot_name(i), s.str());
    files.push_back(snapshot_name(i));
  }
  if (record.final_state) {
    std::ostringstream s;
    write_profile(s, *record.final_state);
    spill(root / "final.profile", s.str());
    files.push_back("final.profile");
  }

  Manifest m;
  for (const auto& f : files) {
    const std::string content = slurp(root / f);
    m.entries.push_back({f, sha256_hex(content), content.size()});
  }
  json mj;
  mj["digest"] = m.digest();
  for (const auto& e : m.entries) mj["files"].push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
  spill(root / "manifest.json", mj.dump(2) + "\n");
  return m;
}

namespace {

Manifest read_manifest(const fs::path& root) {
  json mj;
  try {
    mj = json::parse(slurp(root / "manifest.json"));
  } catch (const json::exception& e) {
    throw IoError("manifest.json in '" + root.string() + "': " + e.what());
  }
  Manifest m;
  for (const auto& e : mj["files"]) {
    m.entries.push_back({e["path"].get<std::string>(), e["sha256"].get<std::string>(), e["bytes"].get<std::uintmax_t>()});
  }
  return m;
}

}  // namespace

PersistedRun load_run(const std::string& dir) {
  const fs::path root(dir);
  PersistedRun out;
  json summary;
  try {
    out.config = run_config_from_json(json::parse(slurp(root / "config.json")));
    summary = json::parse(slurp(root / "summary.json"));
  } catch (const json::exception& e) {
    throw IoError("run in '" + dir + "': " + e.what());
  }
  auto& r = out.record;
  r.degree = summary.at("degree").get<int>();
  r.config = solver_from(summary.at("solver"));
  r.stop = stop_from(summary.at("stop"));
  r.termination = summary.at("termination").get<std::string>();
  r.steps = summary.at("steps").get<std::size_t>();
  r.halvings = summary.at("halvings").get<int>();
  r.max_norm_defect = summary.at("max_norm_defect").get<double>();
  r.energy_drift = summary.at("energy_drift").get<double>();
  r.energy_trapezoid_drift = summary.at("energy_trapezoid_drift").get<double>();
  r.flags = summary.at("flags").get<std::vector<std::string>>();
  {
    std::istringstream in(slurp(root / "diagnostics.csv"));
    r.diagnostics = read_diagnostics_csv(in);
  }
  const auto n = summary.at("snapshots").get<std::size_t>();
  for (std::size_t i = 0; i < n; ++i) r.snapshots.push_back(load_profile((root / snapshot_name(i)).string()));
  if (summary.at("final_state").get<bool>()) r.final_state = load_profile((root / "final.profile").string());
  out.manifest = read_manifest(root);
  return out;
}

std::vector<std::string> verify_manifest(const std::string& dir) {
  const fs::path root(dir);
  const Manifest m = read_manifest(root);
  std::vector<std::string> bad;
  for (const auto& e : m.entries) {
    const fs::path p = root / e.path;
    if (!fs::exists(p) || sha256_file(p.string()) != e.sha256) bad.push_back(e.path);
  }
  return bad;
}

void emit_rate_ratio(std::ostream& out, const ModTrajectory& traj, const std::optional<FitResult>& fit) {
  if (!fit) throw ConfigError("rate-ratio plot data need a blow-up fit");
  if (traj.samples.empty()) throw DomainError("rate-ratio plot data: empty trajectory");
  const auto S = traj.remaining_time();
  out << "t T_minus_t lambda ratio\n" << std::setprecision(17);
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const double rem = S[i] + fit->remaining;
    const double L = std::log(rem);
    out << traj.samples[i].t << ' ' << rem << ' ' << traj.samples[i].lambda << ' '
        << traj.samples[i].lambda * L * L / rem << '\n';
  }
}

void emit_trajectory(std::ostream& out, const ModTrajectory& traj) {
  if (traj.samples.empty()) throw DomainError("trajectory plot data: empty trajectory");
  out << "s t lambda b theta a\n" << std::setprecision(17);
  for (const auto& x : traj.samples) {
    out << x.s << ' ' << x.t << ' ' << x.lambda << ' ' << x.b << ' ' << x.theta << ' ' << x.a << '\n';
  }
}

void emit_trajectory(std::ostream& out, const ModSeries& series) {
  if (series.samples.empty()) throw DomainError("trajectory plot data: empty series");
  out << "t lambda b theta a\n" << std::setprecision(17);
  for (const auto& x : series.samples) {
    out << x.t << ' ' << x.lambda << ' ' << x.b << ' ' << x.theta << ' ' << x.a << '\n';
  }
}

void emit_tail_check(std::ostream& out, const RadialFunction& t01) {
  const auto& g = t01.grid();
  std::size_t rows = 0;
  std::ostringstream body;
  body << std::setprecision(17);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double y = g[i];
    if (!(y > std::numbers::e)) continue;
    const double ref = y * std::log(y) - y;
    body << y << ' ' << t01[i] << ' ' << ref << ' ' << t01[i] / ref << '\n';
    ++rows;
  }
  if (rows == 0) throw DomainError("tail-check plot data: no samples beyond y = e");
  out << "y T01 y_log_y_minus_y ratio\n" << body.str();
}

ModSeries snapshot_series(const std::vector<EquivariantProfile>& snapshots) {
  std::vector<double> t, l, th;
  std::optional<double> prev_l, prev_th;
  for (const auto& p : snapshots) {
    try {
      const double lam = extract_lambda(p, prev_l);
      const double theta = extract_theta(p, lam, prev_th);
      t.push_back(p.time());
      l.push_back(lam);
      th.push_back(theta);
      prev_l = lam;
      prev_th = theta;
    } catch (const ExtractionAmbiguousError&) {
    } catch (const DegeneratePhaseError&) {
    }
  }
  if (t.size() < 3) return {};
  return extract_b_a(t, l, th);
}

}  // namespace smap
