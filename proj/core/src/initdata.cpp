#include "smap/initdata.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>

#include "smap/errors.hpp"

namespace smap {

double smooth_cutoff(double x) {
  if (x <= 1.0) return 1.0;
  if (x >= 2.0) return 0.0;
  const double u = x - 1.0;
  return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}

double BlowupDataSpec::cutoff_scale() const {
  if (cutoff) return *cutoff;
  return b0 > 0.0 ? 1.0 / std::sqrt(b0) : 1.0;
}

void validate(const BlowupDataSpec& spec) {
  auto bad = [](const std::string& what) { throw ConfigError("initdata: " + what); };
  if (!(spec.lambda0 > 0.0) || !std::isfinite(spec.lambda0)) bad("lambda0 must be positive");
  if (!(spec.b_ceiling > 0.0 && spec.b_ceiling < 1.0)) bad("b_ceiling must lie in (0, 1)");
  if (!(spec.b0 >= 0.0 && spec.b0 < spec.b_ceiling)) bad("b0 must lie in [0, b_ceiling)");
  if (!std::isfinite(spec.a0) || !std::isfinite(spec.theta0)) bad("a0 and theta0 must be finite");
  if (spec.cutoff && !(*spec.cutoff > 0.0)) bad("cutoff B0 must be positive");
  if (!(spec.smallness > 0.0 && spec.smallness < 1.0)) bad("smallness bound must lie in (0, 1)");
}

RadialFunction first_order_beta(double b, double cutoff, const RadialGrid& y_grid, KernelGauge gauge) {
  if (!(cutoff > 0.0)) throw DomainError("cutoff scale must be positive");
  std::vector<double> beta(y_grid.size(), 0.0);
  if (b != 0.0) {
    const RadialFunction t01 = profile_T01(y_grid, gauge);
    for (std::size_t i = 0; i < y_grid.size(); ++i) {
      const double chi = smooth_cutoff(y_grid[i] / cutoff);
      if (chi > 0.0) beta[i] = -b * t01[i] * chi;
    }
  }
  return RadialFunction(y_grid, std::move(beta));
}

namespace {

RadialFunction beta_for(const BlowupDataSpec& spec, const RadialGrid& grid) {
  return first_order_beta(spec.b0, spec.cutoff_scale(), grid.scaled(1.0 / spec.lambda0), spec.gauge);
}

double sup_abs(const RadialFunction& f) {
  double s = 0.0;
  for (double x : f.samples()) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

double blowup_data_sup(const BlowupDataSpec& spec) {
  validate(spec);
  return sup_abs(beta_for(spec, RadialGrid::from_spec(spec.grid)));
}

EquivariantProfile build_blowup_data(const BlowupDataSpec& spec) {
  return build_blowup_data(spec, RadialGrid::from_spec(spec.grid));
}

EquivariantProfile build_blowup_data(const BlowupDataSpec& spec, const RadialGrid& grid) {
  validate(spec);
  const RadialFunction beta = beta_for(spec, grid);
  const double sup = sup_abs(beta);
  if (!(sup < spec.smallness)) {
    std::ostringstream msg;
    msg << "b0 sup|T01 chi| = " << sup << " is not below " << spec.smallness << " (b0 = " << spec.b0
        << ", B0 = " << spec.cutoff_scale() << ")";
    throw SmallnessViolation(msg.str());
  }
  const RadialGrid& yg = beta.grid();
  std::vector<double> gamma(yg.size());
  for (std::size_t i = 0; i < yg.size(); ++i) gamma[i] = std::sqrt(1.0 - beta[i] * beta[i]) - 1.0;
  const RadialFunction alpha(yg, std::vector<double>(yg.size(), 0.0));
  return frenet_reconstruct(alpha, beta, RadialFunction(yg, std::move(gamma)), spec.lambda0, spec.theta0, grid);
}

std::string provenance_json(const BlowupDataSpec& spec) {
  nlohmann::json j;
  j["lambda0"] = spec.lambda0;
  j["b0"] = spec.b0;
  j["a0"] = spec.a0;
  j["theta0"] = spec.theta0;
  j["B0"] = spec.cutoff_scale();
  j["gauge"] = spec.gauge == KernelGauge::Frobenius ? "frobenius" : "orthogonal";
  j["grid"] = {{"spacing", to_string(spec.grid.spacing)},
               {"n", spec.grid.n},
               {"r_max", spec.grid.r_max},
               {"stretch", spec.grid.stretch}};
  return j.dump(2);
}

void save_blowup_data(const EquivariantProfile& p, const BlowupDataSpec& spec, const std::string& path) {
  save_profile(p, path);
  std::ofstream side(path + ".json");
  if (!side) throw IoError("cannot write " + path + ".json");
  side << provenance_json(spec) << '\n';
  if (!side) throw IoError("write failed for " + path + ".json");
}

ClosenessReport closeness_report(const EquivariantProfile& p, double lambda0, double theta0) {
  const EquivariantProfile ref = harmonic_map(p.degree() == 0 ? 1 : p.degree(), p.grid(), lambda0, theta0);
  ClosenessReport rep;
  rep.energy_excess = dirichlet_energy(p, Quadrature::Staggered) - dirichlet_energy(ref, Quadrature::Staggered);
  const auto& g = p.grid();
  const auto& a = g.faces();
  const auto& m = g.measure();
  const double k2 = static_cast<double>(p.degree()) * p.degree();
  double acc = 0.0;
  Vec3 prev{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 d = p[i].vec() - ref[i].vec();
    const Vec3 dd = d - prev;
    acc += a[i] * dot(dd, dd) + m[i] * k2 * (d.x1 * d.x1 + d.x2 * d.x2) / (g[i] * g[i]);
    prev = d;
  }
  rep.h1_distance = std::sqrt(2.0 * std::numbers::pi * acc);
  return rep;
}

EquivariantProfile perturbed_ground_state(int k, const RadialGrid& grid, double amplitude, double center,
                                          double width, double wavenumber) {
  if (!(width > 0.0)) throw DomainError("perturbation width must be positive");
  std::vector<SphereVec> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid[i];
    const double z = (r - center) / width;
    const double psi = r * r / (1.0 + r * r) * std::exp(-z * z);
    const Vec3 q = harmonic_map_profile(k, r).vec();
    const Vec3 e_r{q.x3, 0.0, -q.x1};
    const Vec3 e_tau{0.0, 1.0, 0.0};
    const Vec3 dir = std::cos(wavenumber * r) * e_r + std::sin(wavenumber * r) * e_tau;
    vals[i] = SphereVec::project(q + amplitude * psi * dir);
  }
  return EquivariantProfile(grid, std::move(vals), k);
}

}  // namespace smap
