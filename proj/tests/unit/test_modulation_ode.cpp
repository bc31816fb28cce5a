#include <doctest.h>

#include <cmath>
#include <sstream>

#include "smap/errors.hpp"
#include "smap/modulation_ode.hpp"

using namespace smap;

namespace {
ModelParams leading() { return {ModVariant::LeadingOrder, 0.1, 0.5}; }
ModelParams logc() { return {ModVariant::LogCorrected, 0.1, 0.5}; }
ModState start(double b, double a = 0.0, double lambda = 1.0) {
  ModState s;
  s.b = b;
  s.a = a;
  s.lambda = lambda;
  return s;
}
}  // namespace

TEST_CASE("log-corrected rhs at b = 0.01") {
  const auto d = mod_rhs(start(0.01), logc());
  CHECK(d.b_s == doctest::Approx(-1e-4 * (1.0 + 1.0 / (2.0 * std::log(100.0)))).epsilon(1e-14));
  CHECK(d.b_s == doctest::Approx(-1e-4 * 1.108574).epsilon(1e-6));
  CHECK(d.a_s == 0.0);
  const auto d2 = mod_rhs(start(0.01, 0.001), logc());
  CHECK(d2.a_s == doctest::Approx(-4.3429e-6).epsilon(1e-4));
  CHECK(d2.theta_s == -0.001);
  CHECK(d2.t_s == 1.0);
  CHECK(d2.lambda_s == doctest::Approx(-0.01));
}

TEST_CASE("leading-order rhs") {
  const auto d = mod_rhs(start(0.05, 0.02, 2.0), leading());
  CHECK(d.b_s == doctest::Approx(-0.0025 - 0.0004));
  CHECK(d.a_s == 0.0);
  CHECK(d.lambda_s == doctest::Approx(-0.1));
  CHECK(d.t_s == doctest::Approx(4.0));
}

TEST_CASE("log-corrected domain guard") {
  CHECK_THROWS_AS(mod_rhs(start(0.1), logc()), DomainError);
  CHECK_THROWS_AS(mod_rhs(start(0.0), logc()), DomainError);
  CHECK_THROWS_AS(mod_rhs(start(-0.01), logc()), DomainError);
  CHECK_NOTHROW(mod_rhs(start(0.5), leading()));
}

TEST_CASE("leading-order closed form") {
  const double b0 = 0.05, l0 = 0.8;
  const double T = l0 * l0 / b0;
  SUBCASE("forward physical time over three decades of lambda") {
    const auto traj = integrate(start(b0, 0.0, l0), leading(), {1e-3 * l0});
    CHECK(traj.reason == Termination::LambdaFloor);
    double worst = 0.0;
    for (const auto& x : traj.samples) worst = std::max(worst, std::abs(x.lambda / ((b0 / l0) * (T - x.t)) - 1.0));
    CHECK(worst < 1e-8);
  }
  SUBCASE("remaining time to full depth") {
    const auto traj = integrate(start(b0, 0.0, l0), leading(), {1e-8 * l0});
    const auto S = traj.remaining_time();
    const double tail = traj.back().lambda * l0 / b0;
    double worst = 0.0;
    for (std::size_t i = 0; i < S.size(); ++i) {
      const auto& x = traj.samples[i];
      worst = std::max(worst, std::abs(x.lambda / ((b0 / l0) * (S[i] + tail)) - 1.0));
      CHECK(x.lambda == doctest::Approx(l0 / (1.0 + b0 * x.s)).epsilon(1e-8));
      CHECK(x.b == doctest::Approx(b0 / (1.0 + b0 * x.s)).epsilon(1e-8));
    }
    CHECK(worst < 1e-8);
    const auto fit = fit_linear_law(traj);
    CHECK(fit.residual < 1e-6);
    CHECK(fit.kappa == doctest::Approx(b0 / l0).epsilon(1e-6));
  }
}

TEST_CASE("trajectory monotonicity and a = 0 invariance") {
  const auto traj = integrate(start(0.01), logc(), {1e-20});
  CHECK(traj.reason == Termination::LambdaFloor);
  CHECK(traj.back().lambda == doctest::Approx(1e-20).epsilon(1e-6));
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    CHECK(traj.samples[i].s > traj.samples[i - 1].s);
    CHECK(traj.increments[i - 1] > 0.0);
    CHECK(traj.samples[i].b < traj.samples[i - 1].b);
    CHECK(traj.samples[i].lambda < traj.samples[i - 1].lambda);
    CHECK(traj.samples[i].a == 0.0);
    CHECK(traj.samples[i].b > 0.0);
  }
}

TEST_CASE("blow-up law fit is stable across tolerances") {
  for (double b0 : {1e-2, 1e-3}) {
    CAPTURE(b0);
    const auto f10 = fit_blowup_law(integrate(start(b0), logc(), {1e-40}, {1e-10}));
    const auto f12 = fit_blowup_law(integrate(start(b0), logc(), {1e-40}, {1e-12}));
    MESSAGE("kappa " << f10.kappa << " " << f12.kappa << " var " << f10.ratio_variation);
    CHECK(f10.ratio_variation < 0.1);
    CHECK(f12.ratio_variation < 0.1);
    CHECK(std::abs(f10.kappa / f12.kappa - 1.0) < 0.05);
    CHECK(f10.remaining > 0.0);
  }
}

TEST_CASE("fit rejects trajectories that did not reach the floor") {
  const auto traj = integrate(start(0.05, 0.05), leading(), {1e-30});
  CHECK(traj.reason == Termination::BCrossedZero);
  CHECK(std::abs(traj.back().b) < 1e-9);
  CHECK_THROWS_AS(fit_blowup_law(traj), FitWindowError);
}

TEST_CASE("s budget") {
  StopCriteria stop;
  stop.s_budget = 10.0;
  const auto traj = integrate(start(0.01), logc(), stop);
  CHECK(traj.reason == Termination::SBudget);
  CHECK(traj.back().s == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("instability probe") {
  const auto zero = instability_probe(0.01, 0.0);
  CHECK(zero.monotone);
  const auto plus = instability_probe(0.01, 0.1);
  const auto minus = instability_probe(0.01, -0.1);
  CHECK(plus.monotone);
  CHECK(minus.monotone);
  CHECK(plus.rho.back() > 10.0 * plus.rho.front());
  REQUIRE(plus.trajectory.samples.size() == minus.trajectory.samples.size());
  for (std::size_t i = 0; i < plus.trajectory.samples.size(); ++i) {
    const auto& p = plus.trajectory.samples[i];
    const auto& m = minus.trajectory.samples[i];
    CHECK(p.a == -m.a);
    CHECK(p.theta == -m.theta);
    CHECK(p.b == m.b);
    CHECK(p.lambda == m.lambda);
  }
  CHECK_THROWS_AS(instability_probe(0.01, 1.5), DomainError);
}

TEST_CASE("damping: a0 != 0 lowers b and slows the concentration at equal s") {
  for (double budget : {10.0, 100.0, 300.0}) {
    CAPTURE(budget);
    StopCriteria stop;
    stop.lambda_floor = 1e-300;
    stop.s_budget = budget;
    const auto t0 = integrate(start(0.01), logc(), stop);
    const auto t1 = integrate(start(0.01, 1e-3), logc(), stop);
    REQUIRE(t0.reason == Termination::SBudget);
    REQUIRE(t1.reason == Termination::SBudget);
    CHECK(t1.back().b < t0.back().b);
    CHECK(t1.back().lambda > t0.back().lambda);
  }
}

TEST_CASE("csv and json") {
  const auto traj = integrate(start(0.05), leading(), {1e-2});
  std::ostringstream out;
  write_trajectory_csv(out, traj);
  CHECK(out.str().rfind("s,t,lambda,b,theta,a\n", 0) == 0);
  CHECK(fit_result_json(fit_linear_law(traj)).find("\"kappa\"") != std::string::npos);
}
