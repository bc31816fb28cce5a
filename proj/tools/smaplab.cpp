#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "smap/errors.hpp"
#include "smap/geometry.hpp"
#include "smap/harness.hpp"
#include "smap/initdata.hpp"
#include "smap/linops.hpp"
#include "smap/modextract.hpp"
#include "smap/modulation_ode.hpp"
#include "smap/pde_solver.hpp"
#include "smap/verification.hpp"

namespace fs = std::filesystem;
using namespace smap;

namespace {

// Flags shared by every subcommand. Values left unset keep whatever the
// config file (or the defaults) say.
struct Common {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
};

struct GridFlags {
  std::optional<std::string> spacing;
  std::optional<std::size_t> n;
  std::optional<double> rmax, stretch;

  void add(CLI::App* app) {
    app->add_option("--spacing", spacing, "uniform | geometric");
    app->add_option("--n", n, "number of grid nodes");
    app->add_option("--rmax", rmax, "outer radius");
    app->add_option("--stretch", stretch, "geometric stretch parameter");
  }
  void apply(GridSpec& g) const {
    if (spacing) {
      try {
        g.spacing = spacing_from_string(*spacing);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
    if (n) g.n = *n;
    if (rmax) g.r_max = *rmax;
    if (stretch) g.stretch = *stretch;
  }
};

struct OdeFlags {
  std::optional<double> b0, a0, lambda0, theta0, floor, s_budget, rtol, b_ceiling, log_coefficient, decades;
  std::optional<std::string> variant;

  void add(CLI::App* app) {
    app->add_option("--b0", b0);
    app->add_option("--a0", a0);
    app->add_option("--lambda0", lambda0);
    app->add_option("--theta0", theta0);
    app->add_option("--variant", variant, "log | leading");
    app->add_option("--floor", floor, "lambda floor");
    app->add_option("--s-budget", s_budget);
    app->add_option("--rtol", rtol);
    app->add_option("--b-ceiling", b_ceiling);
    app->add_option("--log-coefficient", log_coefficient);
    app->add_option("--decades", decades, "fit window in decades of T - t");
  }
  void apply(RunConfig& c) const {
    if (b0) c.ode_state.b = *b0;
    if (a0) c.ode_state.a = *a0;
    if (lambda0) c.ode_state.lambda = *lambda0;
    if (theta0) c.ode_state.theta = *theta0;
    if (variant) {
      try {
        c.model.variant = mod_variant_from_string(*variant);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
    if (floor) c.ode_stop.lambda_floor = *floor;
    if (s_budget) c.ode_stop.s_budget = *s_budget;
    if (rtol) c.integrator.rtol = *rtol;
    if (b_ceiling) c.model.b_ceiling = *b_ceiling;
    if (log_coefficient) c.model.log_coefficient = *log_coefficient;
    if (decades) c.fit.decades = *decades;
  }
};

RunConfig base_config(const Common& common, const std::string& command) {
  RunConfig cfg;
  if (!common.config_path.empty()) {
    std::ifstream in(common.config_path);
    if (!in) throw IoError("cannot open config '" + common.config_path + "'");
    try {
      cfg = run_config_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config '" + common.config_path + "': " + e.what());
    }
  }
  cfg.command = command;
  if (common.seed) cfg.seed = *common.seed;
  if (!common.out.empty()) cfg.output_dir = common.out;
  if (cfg.output_dir.empty()) cfg.output_dir = (fs::path(output_root()) / command).string();
  return cfg;
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
  return fs::path(dir);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  return out;
}

void write_config(const RunConfig& cfg, const fs::path& dir) {
  open_out(dir / "config.json") << to_json(cfg).dump(2) << '\n';
}

int cmd_profiles(const RunConfig& cfg, int k, bool t01, const std::string& gauge) {
  validate(cfg);
  const auto dir = prepare_dir(cfg.output_dir);
  write_config(cfg, dir);
  const auto grid = RadialGrid::from_spec(cfg.grid);
  const auto q = harmonic_map(k, grid);
  save_profile(q, (dir / ("Q" + std::to_string(k) + ".profile")).string());
  std::cout << "Q_" << k << " on " << grid.size() << " nodes, energy " << dirichlet_energy(q, Quadrature::Staggered)
            << " (exact " << harmonic_map_energy(k, grid.r_max()) << ")\n";
  if (t01) {
    KernelGauge g;
    if (gauge == "frobenius") {
      g = KernelGauge::Frobenius;
    } else if (gauge == "orthogonal") {
      g = KernelGauge::OrthogonalToResonance;
    } else {
      throw ConfigError("unknown gauge '" + gauge + "'");
    }
    const auto t = profile_T01(grid, g);
    auto out = open_out(dir / "t01_tail.dat");
    emit_tail_check(out, t);
    nlohmann::json rep;
    for (double y : {10.0, 100.0, 1000.0}) {
      if (y < grid.r_max()) rep["tail_ratio"][std::to_string(static_cast<int>(y))] = t01_tail_ratio(t, y);
    }
    open_out(dir / "t01_report.json") << rep.dump(2) << '\n';
    std::cout << "T01 tail ratios " << rep["tail_ratio"].dump() << '\n';
  }
  std::cout << "wrote " << dir.string() << '\n';
  return 0;
}

struct OdeOutcome {
  ModTrajectory traj;
  std::optional<FitResult> fit;
};

OdeOutcome run_ode(const RunConfig& cfg) {
  OdeOutcome o;
  o.traj = integrate(cfg.ode_state, cfg.model, cfg.ode_stop, cfg.integrator);
  if (cfg.model.variant == ModVariant::LeadingOrder) {
    o.fit = fit_linear_law(o.traj);
  } else if (o.traj.reason == Termination::LambdaFloor) {
    o.fit = fit_blowup_law(o.traj, cfg.fit);
  }
  return o;
}

int cmd_ode(const RunConfig& cfg) {
  validate(cfg);
  const auto dir = prepare_dir(cfg.output_dir);
  write_config(cfg, dir);
  const auto o = run_ode(cfg);
  {
    auto out = open_out(dir / "trajectory.csv");
    write_trajectory_csv(out, o.traj);
  }
  std::cout << "ended by " << to_string(o.traj.reason) << " after " << o.traj.samples.size() << " samples, lambda "
            << o.traj.back().lambda << '\n';
  if (o.fit) {
    open_out(dir / "fit.json") << fit_result_json(*o.fit) << '\n';
    std::cout << fit_result_json(*o.fit) << '\n';
  } else {
    std::cout << "no fit: the trajectory did not reach the lambda floor\n";
  }
  std::cout << "wrote " << dir.string() << '\n';
  return 0;
}

int cmd_fit(const RunConfig& cfg, const std::string& plot) {
  validate(cfg);
  const auto kind = plot_kind_from_string(plot);
  const auto dir = prepare_dir(cfg.output_dir);
  write_config(cfg, dir);
  const auto o = run_ode(cfg);
  const auto path = dir / (to_string(kind) + ".dat");
  auto out = open_out(path);
  switch (kind) {
    case PlotKind::RateRatio: emit_rate_ratio(out, o.traj, o.fit); break;
    case PlotKind::Trajectory: emit_trajectory(out, o.traj); break;
    case PlotKind::TailCheck: throw ConfigError("tail-check plot data come from `profiles --t01`");
  }
  if (!o.fit) throw FitWindowError("the trajectory did not reach the lambda floor");
  open_out(dir / "fit.json") << fit_result_json(*o.fit) << '\n';
  std::cout << fit_result_json(*o.fit) << "\nwrote " << path.string() << '\n';
  return 0;
}

int cmd_evolve(const RunConfig& cfg) {
  validate(cfg);
  const auto p0 = initial_profile(cfg);
  const auto run = evolve(p0, cfg.solver, cfg.stop);
  const auto m = persist_run(run, cfg, cfg.output_dir);
  const auto series = snapshot_series(run.snapshots);
  if (!series.samples.empty()) {
    auto out = open_out(fs::path(cfg.output_dir) / "modulation.csv");
    write_mod_series_csv(out, series);
  }
  std::cout << "ended by " << run.termination << " after " << run.steps << " steps; energy drift " << run.energy_drift
            << ", max norm defect " << run.max_norm_defect << "; manifest " << m.digest() << '\n';
  std::cout << "wrote " << cfg.output_dir << '\n';
  return run.termination == "step_failure" || run.termination == "energy_drift" ? 1 : 0;
}

int cmd_extract(const std::string& run_dir, const std::string& profile, std::optional<double> b_ceiling) {
  if (!profile.empty()) {
    const auto p = load_profile(profile);
    const double l = extract_lambda(p);
    std::cout << "lambda " << l << " theta " << extract_theta(p, l) << '\n';
    return 0;
  }
  if (run_dir.empty()) throw ConfigError("extract needs --run or --profile");
  const auto bad = verify_manifest(run_dir);
  if (!bad.empty()) throw IoError("run '" + run_dir + "' fails its manifest: " + bad.front());
  const auto run = load_run(run_dir);
  const auto series = snapshot_series(run.record.snapshots);
  if (series.samples.empty()) throw DomainError("fewer than three usable snapshots in '" + run_dir + "'");
  const fs::path dir(run_dir);
  {
    auto out = open_out(dir / "modulation.csv");
    write_mod_series_csv(out, series);
  }
  auto mon = open_out(dir / "monitor.csv");
  mon << "t,lambda,b,monitor\n";
  const double ceiling = b_ceiling.value_or(run.config.initdata.b_ceiling);
  std::size_t k = 0;
  for (const auto& s : series.samples) {
    while (k < run.record.snapshots.size() && run.record.snapshots[k].time() < s.t) ++k;
    if (k >= run.record.snapshots.size()) break;
    mon << s.t << ',' << s.lambda << ',' << s.b << ',';
    if (s.b > 0.0 && s.b < ceiling) {
      mon << sobolev_diagnostic(remainder(run.record.snapshots[k], s.lambda, s.theta), s.b, ceiling).monitor << '\n';
    } else {
      mon << "out_of_domain\n";
    }
  }
  std::cout << series.samples.size() << " samples; wrote modulation.csv and monitor.csv in " << run_dir << '\n';
  return 0;
}

int cmd_verify(const std::vector<int>& only, bool quick, const std::string& artifacts) {
  VerifyOptions opt;
  opt.only = {only.begin(), only.end()};
  opt.quick = quick;
  opt.artifact_dir = artifacts.empty() ? (fs::path(output_root()) / "verify").string() : artifacts;
  opt.on_result = [](const CriterionResult& r) { std::cout << format_result_line(r) << std::endl; };
  bool ok = true;
  for (const auto& r : run_verification(opt)) ok = ok && (r.pass || r.skipped);
  return ok ? 0 : 1;
}

void error_line(const std::string& code, const std::string& message) {
  std::string flat = message;
  for (auto& c : flat) {
    if (c == '\n') c = ' ';
  }
  std::cerr << "error code=" << code << " message=" << flat << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivariant Schroedinger map blow-up laboratory"};
  app.require_subcommand(1);
  Common common;
  GridFlags grid;
  OdeFlags ode;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON run configuration");
    sub->add_option("--out", common.out, "output directory");
    sub->add_option("--seed", common.seed);
  };

  auto* profiles = app.add_subcommand("profiles", "ground states and the radiation profile T01");
  add_common(profiles);
  grid.add(profiles);
  int k = 1;
  bool t01 = false;
  std::string gauge = "frobenius";
  profiles->add_option("--k", k, "equivariance degree");
  profiles->add_flag("--t01", t01, "also solve for T01 and report its tail");
  profiles->add_option("--gauge", gauge, "frobenius | orthogonal");

  auto* ode_cmd = app.add_subcommand("ode", "integrate the modulation equations");
  add_common(ode_cmd);
  ode.add(ode_cmd);

  auto* fit_cmd = app.add_subcommand("fit", "integrate, fit the blow-up law and emit plot data");
  add_common(fit_cmd);
  ode.add(fit_cmd);
  std::string plot = "rate-ratio";
  fit_cmd->add_option("--plot", plot, "rate-ratio | trajectory");

  auto* evolve_cmd = app.add_subcommand("evolve", "run the equivariant PDE solver");
  add_common(evolve_cmd);
  grid.add(evolve_cmd);
  std::optional<std::string> initial;
  std::optional<int> degree;
  std::optional<double> t_end, b0, cutoff, b_ceiling, perturbation, lambda_floor, snapshot_interval, dt;
  std::optional<int> diagnostic_every;
  bool resolution_floor = false;
  evolve_cmd->add_option("--initial", initial, "blowup | ground_state | perturbed | random_packet");
  evolve_cmd->add_option("--degree", degree);
  evolve_cmd->add_option("--t-end", t_end);
  evolve_cmd->add_option("--b0", b0);
  evolve_cmd->add_option("--cutoff", cutoff, "B0 of the initial data");
  evolve_cmd->add_option("--b-ceiling", b_ceiling);
  evolve_cmd->add_option("--perturbation", perturbation, "packet amplitude");
  evolve_cmd->add_option("--lambda-floor", lambda_floor);
  evolve_cmd->add_flag("--resolution-floor", resolution_floor, "stop at lambda < 10 h0");
  evolve_cmd->add_option("--snapshot-interval", snapshot_interval);
  evolve_cmd->add_option("--diagnostic-every", diagnostic_every);
  evolve_cmd->add_option("--dt", dt);

  auto* extract_cmd = app.add_subcommand("extract", "modulation parameters of a persisted run or a profile");
  std::string run_dir, profile;
  std::optional<double> extract_ceiling;
  extract_cmd->add_option("--run", run_dir, "persisted run directory");
  extract_cmd->add_option("--profile", profile, "single profile file");
  extract_cmd->add_option("--b-ceiling", extract_ceiling);

  auto* verify_cmd = app.add_subcommand("verify", "run the acceptance suite");
  std::vector<int> only;
  bool quick = false;
  std::string artifacts;
  verify_cmd->add_option("--only", only, "criteria to run")->delimiter(',');
  verify_cmd->add_flag("--quick", quick, "skip the long PDE criteria");
  verify_cmd->add_option("--artifacts", artifacts, "directory for series and tables");

  if (argc > 1 && argv[1][0] != '-' && !app.get_subcommand_no_throw(argv[1])) {
    error_line("usage", std::string("unknown subcommand '") + argv[1] + "'");
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_line("usage", e.what());
    return 2;
  }

  try {
    if (profiles->parsed()) {
      auto cfg = base_config(common, "profiles");
      grid.apply(cfg.grid);
      return cmd_profiles(cfg, k, t01, gauge);
    }
    if (ode_cmd->parsed() || fit_cmd->parsed()) {
      auto cfg = base_config(common, ode_cmd->parsed() ? "ode" : "fit");
      ode.apply(cfg);
      return ode_cmd->parsed() ? cmd_ode(cfg) : cmd_fit(cfg, plot);
    }
    if (evolve_cmd->parsed()) {
      auto cfg = base_config(common, "evolve");
      grid.apply(cfg.grid);
      if (initial) cfg.initial = initial_kind_from_string(*initial);
      if (degree) cfg.degree = *degree;
      if (t_end) cfg.stop.t_end = *t_end;
      if (b0) cfg.initdata.b0 = *b0;
      if (cutoff) cfg.initdata.cutoff = *cutoff;
      if (b_ceiling) cfg.initdata.b_ceiling = *b_ceiling;
      if (perturbation) cfg.perturbation = *perturbation;
      if (lambda_floor) cfg.stop.lambda_floor = *lambda_floor;
      if (resolution_floor) cfg.stop.resolution_floor = true;
      if (snapshot_interval) cfg.solver.snapshot_interval = *snapshot_interval;
      if (diagnostic_every) cfg.solver.diagnostic_every = *diagnostic_every;
      if (dt) cfg.solver.dt = *dt;
      cfg.initdata.grid = cfg.grid;
      return cmd_evolve(cfg);
    }
    if (extract_cmd->parsed()) return cmd_extract(run_dir, profile, extract_ceiling);
    if (verify_cmd->parsed()) return cmd_verify(only, quick, artifacts);
  } catch (const ConfigError& e) {
    error_line(e.code(), e.what());
    return 2;
  } catch (const Error& e) {
    error_line(e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    error_line("internal", e.what());
    return 1;
  }
  return 2;
}
