#include "smap/modextract.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "smap/errors.hpp"
#include "smap/fd_weights.hpp"
#include "smap/interp.hpp"
#include "smap/linops.hpp"

namespace smap {

double extract_lambda(const EquivariantProfile& p, std::optional<double> previous) {
  const auto& g = p.grid();
  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    const double z0 = p[i].x3();
    const double z1 = p[i + 1].x3();
    if ((z0 > 0.0 && z1 <= 0.0) || (z0 < 0.0 && z1 >= 0.0)) {
      roots.push_back(g[i] + (g[i + 1] - g[i]) * z0 / (z0 - z1));
    }
  }
  if (roots.empty()) throw ExtractionAmbiguousError("v3 has no sign change on the grid");
  if (roots.size() == 1) return roots.front();
  if (!previous) {
    std::ostringstream msg;
    msg << "v3 changes sign " << roots.size() << " times and no previous scale was given";
    throw ExtractionAmbiguousError(msg.str());
  }
  double best = roots.front();
  for (double r : roots) {
    if (std::abs(std::log(r / *previous)) < std::abs(std::log(best / *previous))) best = r;
  }
  return best;
}

double extract_theta(const EquivariantProfile& p, double lambda, std::optional<double> previous) {
  if (!(lambda > 0.0)) throw DomainError("extract_theta needs lambda > 0");
  const auto c1 = p.component(1);
  const auto c2 = p.component(2);
  const double v1 = interpolate_cubic(p.grid(), c1, lambda);
  const double v2 = interpolate_cubic(p.grid(), c2, lambda);
  if (std::hypot(v1, v2) < 1e-8) throw DegeneratePhaseError("(v1, v2) vanishes at r = lambda");
  double theta = std::atan2(v2, v1);
  if (previous) {
    const double two_pi = 2.0 * std::numbers::pi;
    theta += two_pi * std::round((*previous - theta) / two_pi);
  }
  return theta;
}

ModSeries extract_b_a(const std::vector<double>& t, const std::vector<double>& lambda,
                      const std::vector<double>& theta) {
  const std::size_t n = t.size();
  if (lambda.size() != n || theta.size() != n) throw DomainError("extract_b_a: series lengths differ");
  if (n < 3) throw DomainError("extract_b_a needs at least three samples");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lambda[i] > 0.0)) throw DomainError("extract_b_a: lambda must stay positive");
    if (i > 0 && !(t[i] > t[i - 1])) throw DomainError("extract_b_a: t must be strictly increasing");
  }
  ModSeries out;
  out.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t start = i == 0 ? 0 : (i == n - 1 ? n - 3 : i - 1);
    const std::span<const double> ts(t.data() + start, 3);
    const auto w = fd_weights(t[i], ts, 1);
    double dl = 0.0, dth = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      dl += w[j] * lambda[start + j];
      dth += w[j] * theta[start + j];
    }
    ModSample s;
    s.t = t[i];
    s.lambda = lambda[i];
    s.theta = theta[i];
    s.b = -dl * lambda[i];
    s.a = -dth * lambda[i] * lambda[i];
    s.one_sided = i == 0 || i == n - 1;
    out.samples.push_back(s);
  }
  return out;
}

RemainderField remainder(const EquivariantProfile& p, double lambda, double theta) {
  return RemainderField{frenet_decompose(p, lambda, theta), lambda, theta};
}

RemainderField subtract_beta(const RemainderField& w, const RadialFunction& beta_reference) {
  if (!w.grid().same_nodes(beta_reference.grid())) {
    throw GridMismatchError("reference profile is not on the remainder's y-grid");
  }
  std::vector<double> beta = w.w.beta.samples();
  for (std::size_t i = 0; i < beta.size(); ++i) beta[i] -= beta_reference[i];
  RemainderField out = w;
  out.w.beta = RadialFunction(w.grid(), std::move(beta));
  return out;
}

SobolevReport sobolev_diagnostic(const RemainderField& w, double b, double b_ceiling) {
  if (!(b > 0.0 && b < b_ceiling)) {
    std::ostringstream msg;
    msg << "sobolev diagnostic needs 0 < b < " << b_ceiling << ", got " << b;
    throw DomainError(msg.str());
  }
  const OperatorH op(w.grid());
  SobolevReport rep;
  rep.alpha_norm = l2_norm(apply_H(op, apply_H(op, w.w.alpha)));
  rep.beta_norm = l2_norm(apply_H(op, apply_H(op, w.w.beta)));
  rep.norm = std::hypot(rep.alpha_norm, rep.beta_norm);
  const double L = -std::log(b);
  rep.monitor = rep.norm * L / (b * b);
  return rep;
}

void write_mod_series_csv(std::ostream& out, const ModSeries& series) {
  out << "t,lambda,b,theta,a\n" << std::setprecision(17);
  for (const auto& s : series.samples) {
    out << s.t << ',' << s.lambda << ',' << s.b << ',' << s.theta << ',' << s.a << '\n';
  }
}

}  // namespace smap
