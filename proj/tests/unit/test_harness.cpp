#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "smap/errors.hpp"
#include "smap/harness.hpp"
#include "smap/linops.hpp"

using namespace smap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("smap_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

RunConfig small_evolve(InitialKind kind, std::uint64_t seed = 7) {
  RunConfig c;
  c.command = "evolve";
  c.seed = seed;
  c.grid = GridSpec{Spacing::GeometricStretch, 160, 20.0, 4.0};
  c.initial = kind;
  c.degree = 1;
  c.perturbation = 2e-2;
  c.stop.t_end = 0.01;
  c.solver.snapshot_interval = 0.0025;
  c.solver.diagnostic_every = 5;
  return c;
}

RunRecord run(const RunConfig& c) { return evolve(initial_profile(c), c.solver, c.stop); }

void check_same_profile(const EquivariantProfile& a, const EquivariantProfile& b) {
  REQUIRE(a.size() == b.size());
  CHECK(a.degree() == b.degree());
  CHECK(a.time() == b.time());
  CHECK(a.grid().same_nodes(b.grid(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
}

}  // namespace

TEST_CASE("sha256 test vectors") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("output root follows the environment") {
  const char* old = std::getenv("SMAP_OUTPUT_ROOT");
  const std::string keep = old ? old : "";
  setenv("SMAP_OUTPUT_ROOT", "/tmp/somewhere", 1);
  CHECK(output_root() == "/tmp/somewhere");
  unsetenv("SMAP_OUTPUT_ROOT");
  CHECK(output_root() == "runs");
  if (old) setenv("SMAP_OUTPUT_ROOT", keep.c_str(), 1);
}

TEST_CASE("run config json round trip") {
  RunConfig c = small_evolve(InitialKind::Blowup, 99);
  c.output_dir = "x/y";
  c.stop.lambda_floor = 0.05;
  c.stop.resolution_floor = true;
  c.initdata.b0 = 0.03;
  c.initdata.cutoff = 4.0;
  c.initdata.gauge = KernelGauge::OrthogonalToResonance;
  c.model.variant = ModVariant::LeadingOrder;
  c.ode_state.b = 0.02;
  c.ode_stop.lambda_floor = 1e-30;
  c.integrator.rtol = 1e-11;
  c.fit.decades = 1.5;
  const auto back = run_config_from_json(nlohmann::json::parse(to_json(c).dump()));
  CHECK(to_json(back) == to_json(c));
  CHECK(back.seed == 99);
  CHECK(*back.stop.lambda_floor == 0.05);
  CHECK(*back.initdata.cutoff == 4.0);
  CHECK(std::isinf(back.ode_stop.s_budget));
  CHECK(back.initdata.grid.n == c.grid.n);

  // missing keys keep defaults
  const auto d = run_config_from_json(nlohmann::json::parse(R"({"command": "ode", "ode": {"b0": 0.01}})"));
  CHECK(d.ode_state.b == 0.01);
  CHECK(d.integrator.rtol == IntegratorOptions{}.rtol);
  CHECK_THROWS_AS(run_config_from_json(nlohmann::json::parse(R"({"initial": "nope"})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(nlohmann::json::parse(R"({"grid": {"n": "many"}})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(nlohmann::json::parse("[1, 2]")), ConfigError);
}

TEST_CASE("config validation rejects domain violations") {
  auto ok = small_evolve(InitialKind::Perturbed);
  CHECK_NOTHROW(validate(ok));

  auto c = ok;
  c.grid.n = 2;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = ok;
  c.grid.r_max = -1.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = ok;
  c.solver.tolerance = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = ok;
  c.stop.t_end = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = ok;
  c.degree = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = ok;
  c.perturbation = -0.1;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = ok;
  c.initial = InitialKind::Blowup;
  c.initdata.b0 = 0.2;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.initdata.b0 = 0.01;
  c.degree = 2;
  CHECK_THROWS_AS(validate(c), ConfigError);

  RunConfig o;
  o.command = "ode";
  o.ode_state.b = 0.01;
  CHECK_NOTHROW(validate(o));
  auto bad = o;
  bad.ode_state.b = 0.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = o;
  bad.ode_state.lambda = -1.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = o;
  bad.integrator.rtol = 0.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = o;
  bad.ode_stop.lambda_floor = 2.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = o;
  bad.model.b_ceiling = 1.5;
  CHECK_THROWS_AS(validate(bad), ConfigError);

  RunConfig u;
  u.command = "nonsense";
  CHECK_THROWS_AS(validate(u), ConfigError);
}

TEST_CASE("diagnostics csv keeps NaN and every bit") {
  Diagnostic d;
  d.t = 0.1 + 1e-17;
  d.dt = 1.0 / 3.0;
  d.energy = 25.132741228718345;
  d.lambda = std::nan("");
  d.theta = -0.0;
  d.iterations = 11;
  std::stringstream s;
  write_diagnostics_csv(s, {d, d});
  const auto back = read_diagnostics_csv(s);
  REQUIRE(back.size() == 2);
  CHECK(back[0].t == d.t);
  CHECK(back[0].dt == d.dt);
  CHECK(back[0].energy == d.energy);
  CHECK(std::isnan(back[0].lambda));
  CHECK(back[0].iterations == 11);
  std::istringstream bad("nope\n");
  CHECK_THROWS_AS(read_diagnostics_csv(bad), IoError);
}

TEST_CASE("persisted runs load back field by field") {
  auto cfg = small_evolve(InitialKind::RandomPacket);
  cfg.solver.extract_modulation = false;
  const auto r = run(cfg);
  REQUIRE(r.snapshots.size() >= 3);
  const auto dir = scratch("roundtrip");
  const auto m = persist_run(r, cfg, dir.string());
  CHECK(fs::exists(dir / "manifest.json"));

  const auto back = load_run(dir.string());
  CHECK(to_json(back.config) == to_json(cfg));
  CHECK(back.manifest.digest() == m.digest());
  const auto& b = back.record;
  CHECK(b.degree == r.degree);
  CHECK(b.termination == r.termination);
  CHECK(b.steps == r.steps);
  CHECK(b.halvings == r.halvings);
  CHECK(b.max_norm_defect == r.max_norm_defect);
  CHECK(b.energy_drift == r.energy_drift);
  CHECK(b.energy_trapezoid_drift == r.energy_trapezoid_drift);
  CHECK(b.flags == r.flags);
  CHECK(b.config.snapshot_interval == r.config.snapshot_interval);
  CHECK(b.stop.t_end == r.stop.t_end);
  REQUIRE(b.diagnostics.size() == r.diagnostics.size());
  for (std::size_t i = 0; i < r.diagnostics.size(); ++i) {
    const auto& x = r.diagnostics[i];
    const auto& y = b.diagnostics[i];
    REQUIRE(same(x.t, y.t));
    REQUIRE(same(x.energy, y.energy));
    REQUIRE(same(x.energy_trapezoid, y.energy_trapezoid));
    REQUIRE(same(x.norm_defect_after, y.norm_defect_after));
    REQUIRE(same(x.lambda, y.lambda));
    REQUIRE(same(x.theta, y.theta));
    REQUIRE(x.iterations == y.iterations);
  }
  REQUIRE(b.snapshots.size() == r.snapshots.size());
  for (std::size_t i = 0; i < r.snapshots.size(); ++i) check_same_profile(b.snapshots[i], r.snapshots[i]);
  REQUIRE(b.final_state.has_value());
  check_same_profile(*b.final_state, *r.final_state);
  fs::remove_all(dir);
}

TEST_CASE("manifest hash changes iff an artifact changes") {
  const auto cfg = small_evolve(InitialKind::Perturbed);
  const auto r = run(cfg);
  const auto dir = scratch("manifest");
  const auto m1 = persist_run(r, cfg, dir.string());
  CHECK(verify_manifest(dir.string()).empty());
  const auto m2 = persist_run(r, cfg, dir.string());
  CHECK(m1.digest() == m2.digest());

  // one changed byte in one artifact
  auto text = slurp(dir / "diagnostics.csv");
  text.back() = text.back() == '\n' ? ' ' : '\n';
  std::ofstream(dir / "diagnostics.csv", std::ios::binary) << text;
  const auto bad = verify_manifest(dir.string());
  REQUIRE(bad.size() == 1);
  CHECK(bad[0] == "diagnostics.csv");

  fs::remove(dir / "final.profile");
  CHECK(verify_manifest(dir.string()).size() == 2);

  auto other = cfg;
  other.seed = 8;
  CHECK(persist_run(r, other, dir.string()).digest() != m1.digest());
  fs::remove_all(dir);
  CHECK_THROWS_AS(load_run(dir.string()), IoError);
}

TEST_CASE("same config and seed give identical diagnostics") {
  const auto cfg = small_evolve(InitialKind::RandomPacket, 1234);
  const auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  persist_run(run(cfg), cfg, a.string());
  persist_run(run(cfg), cfg, b.string());
  CHECK(slurp(a / "diagnostics.csv") == slurp(b / "diagnostics.csv"));
  CHECK(slurp(a / "final.profile") == slurp(b / "final.profile"));
  const auto other = small_evolve(InitialKind::RandomPacket, 1235);
  persist_run(run(other), other, c.string());
  CHECK(slurp(a / "diagnostics.csv") != slurp(c / "diagnostics.csv"));
  for (const auto& d : {a, b, c}) fs::remove_all(d);
}

TEST_CASE("initial profiles") {
  auto c = small_evolve(InitialKind::GroundState);
  c.degree = 2;
  const auto q = initial_profile(c);
  CHECK(sup_distance(q, harmonic_map(2, q.grid())) == 0.0);
  c = small_evolve(InitialKind::Blowup);
  c.initdata.b0 = 0.01;
  const auto p = initial_profile(c);
  CHECK(p.grid().size() == c.grid.n);
  CHECK(sup_distance(p, harmonic_map(1, p.grid())) > 1e-4);
  // seeded packets differ between seeds only
  const auto r1 = initial_profile(small_evolve(InitialKind::RandomPacket, 5));
  const auto r2 = initial_profile(small_evolve(InitialKind::RandomPacket, 5));
  const auto r3 = initial_profile(small_evolve(InitialKind::RandomPacket, 6));
  CHECK(sup_distance(r1, r2) == 0.0);
  CHECK(sup_distance(r1, r3) > 0.0);
}

TEST_CASE("plot data") {
  ModState s0;
  s0.b = 0.01;
  const auto traj = integrate(s0, {}, {1e-40});
  const auto fit = fit_blowup_law(traj);

  std::ostringstream rr;
  CHECK_THROWS_AS(emit_rate_ratio(rr, traj, std::nullopt), ConfigError);
  emit_rate_ratio(rr, traj, fit);
  std::istringstream in(rr.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "t T_minus_t lambda ratio");
  double t, rem, lam, ratio, last = 0.0;
  std::size_t rows = 0;
  while (in >> t >> rem >> lam >> ratio) {
    last = ratio;
    ++rows;
  }
  CHECK(rows == traj.samples.size());
  // the ratio column flattens toward kappa
  CHECK(last == doctest::Approx(fit.kappa).epsilon(0.1));

  std::ostringstream tr;
  emit_trajectory(tr, traj);
  CHECK(tr.str().rfind("s t lambda b theta a\n", 0) == 0);
  std::ostringstream e;
  CHECK_THROWS_AS(emit_trajectory(e, ModTrajectory{}), DomainError);
  CHECK_THROWS_AS(emit_trajectory(e, ModSeries{}), DomainError);
  CHECK_THROWS_AS(emit_rate_ratio(e, ModTrajectory{}, fit), DomainError);

  const auto t01 = profile_T01(RadialGrid::geometric(4000, 1e4, 8.0));
  std::ostringstream tc;
  emit_tail_check(tc, t01);
  std::istringstream tin(tc.str());
  std::getline(tin, header);
  CHECK(header == "y T01 y_log_y_minus_y ratio");
  double y, T, ref, q = 0.0;
  while (tin >> y >> T >> ref >> q) {
    if (y > 1e3) break;
  }
  CHECK(q == doctest::Approx(1.0).epsilon(1e-3));
  CHECK_THROWS_AS(emit_tail_check(e, profile_T01(RadialGrid::uniform(50, 2.0))), DomainError);

  CHECK(plot_kind_from_string("tail-check") == PlotKind::TailCheck);
  CHECK_THROWS_AS(plot_kind_from_string("pie"), ConfigError);
}

TEST_CASE("snapshot series of a run") {
  auto cfg = small_evolve(InitialKind::GroundState);
  const auto r = run(cfg);
  const auto s = snapshot_series(r.snapshots);
  REQUIRE(s.samples.size() == r.snapshots.size());
  for (const auto& x : s.samples) {
    CHECK(x.lambda == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(x.b) < 1e-2);
  }
  CHECK(snapshot_series({}).samples.empty());
}
