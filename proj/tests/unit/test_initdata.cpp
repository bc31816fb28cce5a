#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <vector>

#include "smap/errors.hpp"
#include "smap/geometry.hpp"
#include "smap/initdata.hpp"
#include "smap/modextract.hpp"

using namespace smap;

namespace {

BlowupDataSpec base_spec(double b0) {
  BlowupDataSpec s;
  s.b0 = b0;
  s.grid = GridSpec{Spacing::GeometricStretch, 1200, 60.0, 4.0};
  return s;
}

}  // namespace

TEST_CASE("smooth cutoff") {
  CHECK(smooth_cutoff(0.0) == 1.0);
  CHECK(smooth_cutoff(1.0) == 1.0);
  CHECK(smooth_cutoff(2.0) == 0.0);
  CHECK(smooth_cutoff(7.0) == 0.0);
  CHECK(smooth_cutoff(1.5) == doctest::Approx(0.5));
  double prev = 1.0;
  for (double x = 1.0; x <= 2.0; x += 0.01) {
    CHECK(smooth_cutoff(x) <= prev + 1e-15);
    prev = smooth_cutoff(x);
  }
  // C^2 joins: second differences vanish at both ends
  const double h = 1e-4;
  CHECK(std::abs(smooth_cutoff(1.0 + h) - 1.0) < 1e-10);
  CHECK(std::abs(smooth_cutoff(2.0 - h)) < 1e-10);
}

TEST_CASE("b0 = 0 reproduces the bubble") {
  auto spec = base_spec(0.0);
  spec.cutoff = 10.0;
  spec.lambda0 = 0.7;
  spec.theta0 = 1.1;
  const auto p = build_blowup_data(spec);
  const auto q = harmonic_map(1, p.grid(), 0.7, 1.1);
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, norm(p[i].vec() - q[i].vec()));
  CHECK(worst <= 2e-16);
  const auto c = closeness_report(p, 0.7, 1.1);
  CHECK(std::abs(c.energy_excess) < 1e-12);
  CHECK(c.h1_distance < 1e-12);
}

TEST_CASE("data equal the bubble outside the cutoff support") {
  auto spec = base_spec(0.02);
  spec.lambda0 = 0.8;
  spec.theta0 = -0.3;
  const auto p = build_blowup_data(spec);
  const auto q = harmonic_map(1, p.grid(), spec.lambda0, spec.theta0);
  const double edge = 2.0 * spec.cutoff_scale() * spec.lambda0;
  bool inside_differs = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.grid()[i] >= edge) {
      REQUIRE(p[i] == q[i]);
    } else if (norm(p[i].vec() - q[i].vec()) > 1e-6) {
      inside_differs = true;
    }
  }
  CHECK(inside_differs);
  double defect = 0.0;
  for (const auto& v : p.values()) defect = std::max(defect, std::abs(norm(v.vec()) - 1.0));
  CHECK(defect <= 1e-15);
  CHECK(remainder(p, spec.lambda0, spec.theta0).w.constraint_residual() < 1e-14);
}

TEST_CASE("scale is not moved by the first-order profile") {
  auto spec = base_spec(0.01);
  spec.lambda0 = 0.5;
  const auto p = build_blowup_data(spec);
  CHECK(extract_lambda(p) == doctest::Approx(0.5).epsilon(1e-4));
  // beta e_tau turns the phase at r = lambda by atan(beta(1)), about b0 T01(1)
  CHECK(std::abs(extract_theta(p, extract_lambda(p))) < 2.0 * spec.b0);
}

TEST_CASE("smallness and configuration errors") {
  auto spec = base_spec(0.09);
  spec.cutoff = 100.0;
  spec.grid.r_max = 400.0;
  CHECK(blowup_data_sup(spec) >= 0.5);
  try {
    build_blowup_data(spec);
    FAIL("expected a smallness violation");
  } catch (const SmallnessViolation& e) {
    CHECK(std::string(e.what()).find("sup") != std::string::npos);
  }
  CHECK_THROWS_AS(build_blowup_data(base_spec(-0.01)), ConfigError);
  CHECK_THROWS_AS(build_blowup_data(base_spec(0.1)), ConfigError);
  auto lam = base_spec(0.01);
  lam.lambda0 = 0.0;
  CHECK_THROWS_AS(build_blowup_data(lam), ConfigError);
  auto ceil = base_spec(0.1);
  ceil.b_ceiling = 0.2;
  ceil.cutoff = 4.5;
  CHECK(blowup_data_sup(ceil) == doctest::Approx(0.488).epsilon(0.01));
  CHECK_NOTHROW(build_blowup_data(ceil));
  CHECK(base_spec(0.04).cutoff_scale() == doctest::Approx(5.0));
}

TEST_CASE("closeness decreases with b0") {
  double prev_e = INFINITY, prev_h = INFINITY, first_e = 0.0;
  for (double b0 : {0.05, 0.02, 0.01, 0.005, 0.002}) {
    CAPTURE(b0);
    const auto c = closeness_report(build_blowup_data(base_spec(b0)), 1.0, 0.0);
    CHECK(c.energy_excess > 0.0);
    CHECK(c.energy_excess < prev_e);
    CHECK(c.h1_distance < prev_h);
    if (b0 == 0.05) first_e = c.energy_excess;
    prev_e = c.energy_excess;
    prev_h = c.h1_distance;
  }
  // with B0 = 1/sqrt(b0) the excess scales like b0 log^2 b0
  CHECK(prev_e < 0.25 * first_e);
}

TEST_CASE("closeness metrics are scale invariant") {
  auto a = base_spec(0.01);
  auto b = a;
  b.lambda0 = 0.5;
  const auto grid = RadialGrid::from_spec(a.grid);
  const auto ca = closeness_report(build_blowup_data(a, grid), 1.0, 0.0);
  const auto cb = closeness_report(build_blowup_data(b, grid.scaled(0.5)), 0.5, 0.0);
  CHECK(cb.energy_excess == doctest::Approx(ca.energy_excess).epsilon(1e-10));
  CHECK(cb.h1_distance == doctest::Approx(ca.h1_distance).epsilon(1e-10));
}

TEST_CASE("perturbed ground state") {
  const auto g = RadialGrid::geometric(400, 30.0, 4.0);
  const auto p = perturbed_ground_state(3, g, 1e-2);
  const auto q = harmonic_map(3, g);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, norm(p[i].vec() - q[i].vec()));
  CHECK(worst > 1e-3);
  CHECK(worst < 1.5e-2);
  CHECK(norm(p[0].vec() - q[0].vec()) < 1e-4);
  CHECK(norm(p[g.size() - 1].vec() - q[g.size() - 1].vec()) < 1e-15);
}

TEST_CASE("provenance sidecar") {
  auto spec = base_spec(0.01);
  spec.a0 = 1e-4;
  spec.theta0 = 0.25;
  const auto j = nlohmann::json::parse(provenance_json(spec));
  CHECK(j["b0"] == 0.01);
  CHECK(j["a0"] == 1e-4);
  CHECK(j["theta0"] == 0.25);
  CHECK(j["lambda0"] == 1.0);
  CHECK(j["B0"].get<double>() == doctest::Approx(10.0));
  CHECK(j["grid"]["n"] == 1200);

  const auto dir = std::filesystem::temp_directory_path() / "smap_initdata_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "u0.profile").string();
  const auto p = build_blowup_data(spec);
  save_blowup_data(p, spec, path);
  const auto back = load_profile(path);
  CHECK(back.size() == p.size());
  CHECK(back[17] == p[17]);
  std::ifstream side(path + ".json");
  CHECK(nlohmann::json::parse(side)["b0"] == 0.01);
  std::filesystem::remove_all(dir);
}
