#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "smap/errors.hpp"
#include "smap/geometry.hpp"
#include "smap/initdata.hpp"
#include "smap/pde_solver.hpp"

using namespace smap;

namespace {

EquivariantProfile rotated(const EquivariantProfile& p, double theta) {
  std::vector<SphereVec> v;
  for (const auto& s : p.values()) v.push_back(SphereVec::project(rotate(s.vec(), theta)));
  return EquivariantProfile(p.grid(), v, p.degree(), p.time());
}

EquivariantProfile noisy(const EquivariantProfile& p, double amp, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<SphereVec> v;
  for (std::size_t i = 0; i < p.size(); ++i) {
    v.push_back(SphereVec::project(p[i].vec() + Vec3{u(rng), u(rng), u(rng)}));
  }
  return EquivariantProfile(p.grid(), v, p.degree(), p.time());
}

double weighted_rhs_norm(const EquivariantProfile& p) {
  const auto f = equivariant_rhs(p);
  const auto& m = p.grid().measure();
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += m[i] * dot(f[i], f[i]);
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("rhs is pointwise orthogonal to the field") {
  const auto g = RadialGrid::geometric(300, 20.0, 4.0);
  for (int k : {1, 2, -1}) {
    const auto p = noisy(harmonic_map(k, g), 0.05, 7u + static_cast<unsigned>(k + 3));
    const auto f = equivariant_rhs(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      REQUIRE(std::abs(dot(p[i].vec(), f[i])) <= 1e-12 * std::max(1.0, norm(f[i])));
    }
  }
  for (const auto& x : equivariant_rhs(north_pole_profile(g))) CHECK(x == Vec3{0.0, 0.0, 0.0});
}

TEST_CASE("rhs of Q_k vanishes at second order") {
  for (int k : {1, 3}) {
    CAPTURE(k);
    std::vector<double> r;
    for (std::size_t n : {500, 1000, 2000}) r.push_back(weighted_rhs_norm(harmonic_map(k, RadialGrid::uniform(n, 20.0))));
    CHECK(r[0] / r[1] == doctest::Approx(4.0).epsilon(0.25));
    CHECK(r[1] / r[2] == doctest::Approx(4.0).epsilon(0.25));
  }
}

TEST_CASE("step keeps the sphere constraint and the discrete energy") {
  const auto g = RadialGrid::geometric(400, 20.0, 4.0);
  const auto p = perturbed_ground_state(1, g, 1e-2);
  SolverConfig cfg;
  const double dt = default_dt(g, cfg);
  const auto out = step(p, dt, cfg);
  double defect = 0.0;
  for (const auto& v : out.profile.values()) defect = std::max(defect, std::abs(norm(v.vec()) - 1.0));
  CHECK(defect <= 1e-12);
  CHECK(out.norm_defect_before <= 10.0 * cfg.tolerance);
  CHECK(out.iterations >= 2);
  CHECK(out.contraction < cfg.contraction_limit);
  CHECK(out.profile.time() == doctest::Approx(dt));
  const double e0 = dirichlet_energy(p, Quadrature::Staggered);
  const double e1 = dirichlet_energy(out.profile, Quadrature::Staggered);
  CHECK(std::abs(e1 - e0) / e0 <= 1e-10);
}

TEST_CASE("step is time reversible") {
  const auto g = RadialGrid::geometric(300, 20.0, 4.0);
  const auto p = perturbed_ground_state(2, g, 2e-2);
  SolverConfig cfg;
  const double dt = 0.25 * default_dt(g, cfg);
  const auto fwd = step(p, dt, cfg).profile;
  const auto back = step(fwd, -dt, cfg).profile;
  CHECK(sup_distance(back, p) <= 10.0 * cfg.tolerance);
  CHECK(back.time() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("step rejects bad input and too large steps") {
  const auto g = RadialGrid::uniform(200, 10.0);
  const auto p = perturbed_ground_state(1, g, 1e-2);
  CHECK_THROWS_AS(step(p, 0.0), DomainError);
  CHECK_THROWS_AS(step(p, 1.0), StepFailure);
  SolverConfig cfg;
  cfg.max_iterations = 2;
  CHECK_THROWS_AS(step(p, default_dt(g, cfg), cfg), StepFailure);
}

TEST_CASE("Q1 stays put under evolution") {
  const auto g = RadialGrid::geometric(256, 20.0, 4.0);
  const auto q = harmonic_map(1, g);
  SolverConfig cfg;
  cfg.diagnostic_every = 50;
  StopSpec stop;
  stop.t_end = 0.02;
  const auto run = evolve(q, cfg, stop);
  CHECK(run.termination == "t_end");
  CHECK(run.final_state->time() == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(sup_distance(*run.final_state, q) < 1e-3);
  for (const auto& d : run.diagnostics) {
    REQUIRE(d.lambda == doctest::Approx(1.0).epsilon(1e-3));
    REQUIRE(std::abs(d.theta) < 1e-3);
  }
  for (std::size_t i = 1; i < run.diagnostics.size(); ++i) CHECK(run.diagnostics[i].t > run.diagnostics[i - 1].t);
  CHECK(run.energy_drift < 1e-12);
  CHECK(run.max_norm_defect <= 1e-12);
}

TEST_CASE("rotation commutes with evolution") {
  const auto g = RadialGrid::geometric(200, 20.0, 4.0);
  const auto p = perturbed_ground_state(1, g, 1e-2);
  SolverConfig cfg;
  cfg.extract_modulation = false;
  StopSpec stop;
  stop.t_end = 0.005;
  const auto a = evolve(rotated(p, 0.7), cfg, stop);
  const auto b = evolve(p, cfg, stop);
  CHECK(sup_distance(*a.final_state, rotated(*b.final_state, 0.7)) < 1e-11);
}

TEST_CASE("Q3 with a small perturbation stays close to Q3") {
  const auto g = RadialGrid::geometric(256, 20.0, 4.0);
  const auto q3 = harmonic_map(3, g);
  const auto p0 = perturbed_ground_state(3, g, 1e-2);
  SolverConfig cfg;
  cfg.snapshot_interval = 0.01;
  cfg.extract_modulation = false;
  StopSpec stop;
  stop.t_end = 0.05;
  const auto run = evolve(p0, cfg, stop);
  CHECK(run.termination == "t_end");
  const double d0 = sup_distance(p0, q3);
  CHECK(run.snapshots.size() == 6);
  for (const auto& s : run.snapshots) CHECK(sup_distance(s, q3) < 2.0 * d0);
  CHECK(run.energy_drift < 1e-10);
}

TEST_CASE("temporal order is two") {
  const auto g = RadialGrid::uniform(100, 10.0);
  const auto p = perturbed_ground_state(1, g, 5e-2);
  SolverConfig cfg;
  const auto rep = temporal_study(p, cfg, 0.02, {2e-3, 1e-3, 5e-4, 2.5e-4});
  CHECK_FALSE(rep.inconclusive);
  for (double o : rep.orders) CHECK(o == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("convergence reports") {
  auto rep = convergence_orders({0.1}, {1e-3});
  CHECK(rep.inconclusive);
  rep = convergence_orders({0.1, 0.05, 0.025}, {4e-3, 1e-3, 2.5e-4});
  CHECK_FALSE(rep.inconclusive);
  CHECK(rep.orders[1] == doctest::Approx(2.0));
  rep = convergence_orders({0.025, 0.1, 0.05}, {2.5e-4, 4e-3, 1e-3});
  CHECK(rep.h.front() == 0.1);
  CHECK(convergence_orders({0.1, 0.05, 0.025}, {1e-3, 2e-3, 1e-4}).inconclusive);

  const auto single = refinement_study([](const RadialGrid& gr) { return harmonic_map(1, gr); },
                                       {GridSpec{Spacing::Uniform, 64, 10.0, 0.0}}, SolverConfig{}, 1e-3,
                                       [](const EquivariantProfile& a, const RunRecord&,
                                          const EquivariantProfile& b) { return sup_distance(a, b); });
  CHECK(single.inconclusive);
}

TEST_CASE("solver configuration is validated") {
  SolverConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  auto bad = cfg;
  bad.tolerance = 0.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = cfg;
  bad.dt = -1.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = cfg;
  bad.contraction_limit = 1.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  const auto q = harmonic_map(1, RadialGrid::uniform(50, 5.0));
  StopSpec stop;
  stop.t_end = 0.0;
  CHECK_THROWS_AS(evolve(q, cfg, stop), ConfigError);
  stop.t_end = 1.0;
  stop.lambda_floor = -1.0;
  CHECK_THROWS_AS(evolve(q, cfg, stop), ConfigError);
}
