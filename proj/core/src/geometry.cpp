#include "smap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "smap/errors.hpp"
#include "smap/interp.hpp"

namespace smap {

EquivariantProfile::EquivariantProfile(RadialGrid grid, std::vector<SphereVec> values, int degree,
                                       double time)
    : grid_(std::move(grid)), values_(std::move(values)), degree_(degree), time_(time) {
  if (values_.size() != grid_.size()) throw GridMismatchError("profile values do not match grid");
  for (const auto& v : values_) {
    if (!is_finite(v.vec())) throw CorruptedStateError("profile contains a non-finite value");
  }
}

EquivariantProfile EquivariantProfile::with_time(double t) const {
  EquivariantProfile copy = *this;
  copy.time_ = t;
  return copy;
}

SphereVec EquivariantProfile::origin_value() const {
  return degree_ < 0 ? SphereVec::checked({0.0, 0.0, -1.0}) : SphereVec::north();
}

EquivariantProfile::BoundaryDefect EquivariantProfile::boundary_defect() const {
  BoundaryDefect d;
  d.inner = norm(values_.front().vec() - origin_value().vec());
  const Vec3 outer_ref = degree_ == 0 ? SphereVec::north().vec()
                                      : harmonic_map_profile(degree_, grid_.r_max()).vec();
  d.outer = norm(values_.back().vec() - outer_ref);
  return d;
}

std::vector<double> EquivariantProfile::component(int which) const {
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const Vec3& v = values_[i].vec();
    out[i] = which == 1 ? v.x1 : which == 2 ? v.x2 : v.x3;
  }
  return out;
}

SphereVec harmonic_map_profile(int k, double y) {
  if (k == 0) throw DomainError("harmonic map profile needs a nonzero degree");
  if (!(y > 0.0) || !std::isfinite(y)) throw DomainError("harmonic map profile needs y > 0");
  // Work with w = y^{|k|} and flip for negative degree: Q_{-k}(y) = Q_k(1/y).
  const double w = std::pow(y, std::abs(k));
  double x1 = 0.0;
  double x3 = 0.0;
  if (w <= 1.0) {
    const double w2 = w * w;
    x1 = 2.0 * w / (1.0 + w2);
    x3 = (1.0 - w2) / (1.0 + w2);
  } else {
    const double iw = 1.0 / w;
    const double iw2 = iw * iw;
    x1 = 2.0 * iw / (1.0 + iw2);
    x3 = (iw2 - 1.0) / (1.0 + iw2);
  }
  if (k < 0) x3 = -x3;
  return SphereVec::project({x1, 0.0, x3});
}

EquivariantProfile harmonic_map(int k, const RadialGrid& grid, double lambda, double theta) {
  if (!(lambda > 0.0)) throw DomainError("scale lambda must be positive");
  std::vector<SphereVec> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = SphereVec::project(rotate(harmonic_map_profile(k, grid[i] / lambda).vec(), theta));
  }
  return EquivariantProfile(grid, std::move(values), k);
}

EquivariantProfile north_pole_profile(const RadialGrid& grid) {
  return EquivariantProfile(grid, std::vector<SphereVec>(grid.size(), SphereVec::north()), 0);
}

FrenetTriad frenet_frame(double y) {
  if (!(y > 0.0) || !std::isfinite(y)) throw DomainError("Frenet frame needs y > 0");
  const double y2 = y * y;
  const double d = 1.0 + y2;
  FrenetTriad t;
  t.e_r = SphereVec::project({(1.0 - y2) / d, 0.0, -2.0 * y / d});
  t.e_tau = SphereVec::checked({0.0, 1.0, 0.0});
  t.q = harmonic_map_profile(1, y);
  return t;
}

Frame frenet_frame(const RadialGrid& grid) {
  Frame f{grid, {}, {}, {}};
  f.e_r.reserve(grid.size());
  f.e_tau.reserve(grid.size());
  f.q.reserve(grid.size());
  for (double y : grid.nodes()) {
    const FrenetTriad t = frenet_frame(y);
    f.e_r.push_back(t.e_r);
    f.e_tau.push_back(t.e_tau);
    f.q.push_back(t.q);
  }
  return f;
}

namespace {

// Three-point derivative at node i on a nonuniform grid with the origin value
// as node -1; one-sided at the last node.
Vec3 nodal_derivative(const EquivariantProfile& p, std::size_t i) {
  const auto& g = p.grid();
  const std::size_t n = g.size();
  auto r = [&](std::ptrdiff_t j) { return j < 0 ? 0.0 : g[static_cast<std::size_t>(j)]; };
  auto v = [&](std::ptrdiff_t j) {
    return j < 0 ? p.origin_value().vec() : p[static_cast<std::size_t>(j)].vec();
  };
  const auto ii = static_cast<std::ptrdiff_t>(i);
  std::ptrdiff_t a = ii - 1;
  std::ptrdiff_t b = ii;
  std::ptrdiff_t c = ii + 1;
  if (i + 1 == n) {
    a = ii - 2;
    b = ii - 1;
    c = ii;
  }
  const double xa = r(a), xb = r(b), xc = r(c), x = r(ii);
  // Derivative of the Lagrange interpolant through (a, b, c) evaluated at x.
  const double wa = ((x - xb) + (x - xc)) / ((xa - xb) * (xa - xc));
  const double wb = ((x - xa) + (x - xc)) / ((xb - xa) * (xb - xc));
  const double wc = ((x - xa) + (x - xb)) / ((xc - xa) * (xc - xb));
  return wa * v(a) + wb * v(b) + wc * v(c);
}

}  // namespace

double dirichlet_energy(const EquivariantProfile& p, Quadrature rule) {
  const auto& g = p.grid();
  const double k2 = static_cast<double>(p.degree()) * static_cast<double>(p.degree());
  const auto& m = g.measure();
  for (const auto& v : p.values()) {
    if (!is_finite(v.vec())) throw CorruptedStateError("NaN in profile passed to dirichlet_energy");
  }
  double angular = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3& v = p[i].vec();
    angular += m[i] * k2 * (v.x1 * v.x1 + v.x2 * v.x2) / (g[i] * g[i]);
  }
  double radial = 0.0;
  if (rule == Quadrature::Staggered) {
    const auto& a = g.faces();
    Vec3 prev = p.origin_value().vec();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec3 d = p[i].vec() - prev;
      radial += a[i] * dot(d, d);
      prev = p[i].vec();
    }
  } else {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec3 d = nodal_derivative(p, i);
      radial += m[i] * dot(d, d);
    }
  }
  return 2.0 * std::numbers::pi * (radial + angular);
}

double harmonic_map_energy(int k, double radius) {
  if (k == 0) return 0.0;
  const double ak = std::abs(k);
  const double w = std::pow(radius, 2.0 * ak);
  const double frac = std::isfinite(w) ? w / (1.0 + w) : 1.0;
  return 8.0 * std::numbers::pi * ak * frac;
}

double FrenetTriple::constraint_residual() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double g1 = 1.0 + gamma[i];
    worst = std::max(worst, std::abs(alpha[i] * alpha[i] + beta[i] * beta[i] + g1 * g1 - 1.0));
  }
  return worst;
}

namespace {

FrenetTriple decompose_values(const RadialGrid& y_grid, const std::vector<Vec3>& v_at_ly, double theta) {
  const std::size_t n = y_grid.size();
  std::vector<double> a(n), b(n), c(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 vt = rotate(v_at_ly[i], -theta);
    const FrenetTriad t = frenet_frame(y_grid[i]);
    a[i] = dot(vt, t.e_r.vec());
    b[i] = dot(vt, t.e_tau.vec());
    c[i] = dot(vt, t.q.vec()) - 1.0;
  }
  return {RadialFunction(y_grid, std::move(a)), RadialFunction(y_grid, std::move(b)),
          RadialFunction(y_grid, std::move(c))};
}

}  // namespace

FrenetTriple frenet_decompose(const EquivariantProfile& p, double lambda, double theta) {
  if (!(lambda > 0.0)) throw DomainError("decomposition needs lambda > 0");
  std::vector<Vec3> v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v[i] = p[i].vec();
  return decompose_values(p.grid().scaled(1.0 / lambda), v, theta);
}

FrenetTriple frenet_decompose(const EquivariantProfile& p, double lambda, double theta,
                              const RadialGrid& y_grid) {
  if (!(lambda > 0.0)) throw DomainError("decomposition needs lambda > 0");
  if (y_grid.same_nodes(p.grid().scaled(1.0 / lambda))) return frenet_decompose(p, lambda, theta);
  const auto c1 = p.component(1);
  const auto c2 = p.component(2);
  const auto c3 = p.component(3);
  std::vector<Vec3> v(y_grid.size());
  for (std::size_t i = 0; i < y_grid.size(); ++i) {
    const double r = lambda * y_grid[i];
    const Vec3 raw{interpolate_cubic(p.grid(), c1, r), interpolate_cubic(p.grid(), c2, r),
                   interpolate_cubic(p.grid(), c3, r)};
    v[i] = SphereVec::project(raw).vec();
  }
  return decompose_values(y_grid, v, theta);
}

EquivariantProfile frenet_reconstruct(const RadialFunction& alpha, const RadialFunction& beta,
                                      const RadialFunction& gamma, double lambda, double theta,
                                      const RadialGrid& grid, double constraint_tol) {
  if (!(lambda > 0.0)) throw DomainError("reconstruction needs lambda > 0");
  const RadialGrid& ag = alpha.grid();
  if (!ag.same_nodes(beta.grid()) || !ag.same_nodes(gamma.grid())) {
    throw GridMismatchError("alpha, beta, gamma must share a grid");
  }
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double g1 = 1.0 + gamma[i];
    const double c = alpha[i] * alpha[i] + beta[i] * beta[i] + g1 * g1 - 1.0;
    if (std::abs(c) > constraint_tol) {
      std::ostringstream msg;
      msg << "triple violates alpha^2+beta^2+(1+gamma)^2=1 by " << c << " at y=" << ag[i];
      throw InvalidTripleError(msg.str());
    }
  }
  const bool matching = ag.same_nodes(grid.scaled(1.0 / lambda));
  std::vector<SphereVec> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double y = grid[i] / lambda;
    double a = 0.0, b = 0.0, c = 0.0;
    if (matching) {
      a = alpha[i];
      b = beta[i];
      c = gamma[i];
    } else {
      a = alpha.at(y);
      b = beta.at(y);
      c = gamma.at(y);
    }
    const FrenetTriad t = frenet_frame(y);
    const Vec3 v = a * t.e_r.vec() + b * t.e_tau.vec() + (1.0 + c) * t.q.vec();
    values[i] = SphereVec::project(rotate(v, theta));
  }
  return EquivariantProfile(grid, std::move(values), 1);
}

void write_profile(std::ostream& out, const EquivariantProfile& p) {
  out << std::setprecision(17);
  out << p.degree() << ' ' << p.size() << ' ' << p.grid().r_max() << '\n';
  out << "# time " << p.time() << '\n';
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec3& v = p[i].vec();
    out << p.grid()[i] << ' ' << v.x1 << ' ' << v.x2 << ' ' << v.x3 << '\n';
  }
}

EquivariantProfile read_profile(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty profile stream");
  std::istringstream head(line);
  int k = 0;
  std::size_t n = 0;
  double r_max = 0.0;
  if (!(head >> k >> n >> r_max)) throw IoError("malformed profile header: '" + line + "'");
  double time = 0.0;
  std::vector<double> nodes;
  std::vector<SphereVec> values;
  nodes.reserve(n);
  values.reserve(n);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream c(line.substr(1));
      std::string key;
      if (c >> key && key == "time") c >> time;
      continue;
    }
    std::istringstream row(line);
    double r = 0.0;
    Vec3 v;
    if (!(row >> r >> v.x1 >> v.x2 >> v.x3)) throw IoError("malformed profile row: '" + line + "'");
    nodes.push_back(r);
    values.push_back(SphereVec::checked(v, 1e-10));
  }
  if (nodes.size() != n) throw IoError("profile row count does not match header");
  if (std::abs(nodes.back() - r_max) > 1e-12 * r_max) throw IoError("profile r_max does not match last row");
  return EquivariantProfile(RadialGrid::from_nodes(std::move(nodes)), std::move(values), k, time);
}

void save_profile(const EquivariantProfile& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_profile(out, p);
  if (!out) throw IoError("failed writing '" + path + "'");
}

EquivariantProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_profile(in);
}

}  // namespace smap
