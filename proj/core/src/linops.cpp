#include "smap/linops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "smap/errors.hpp"
#include "smap/fd_weights.hpp"

namespace smap {

double phi(double y) {
  if (!(y > 0.0)) throw DomainError("phi needs y > 0");
  return 2.0 * std::atan(1.0 / y);
}

double lambda_phi(double y) {
  if (!(y > 0.0)) throw DomainError("lambda_phi needs y > 0");
  return -2.0 * y / (1.0 + y * y);
}

double potential(double y) {
  if (!(y > 0.0)) throw DomainError("potential needs y > 0");
  const double y2 = y * y;
  const double d = 1.0 + y2;
  return (y2 * y2 - 6.0 * y2 + 1.0) / (y2 * d * d);
}

OperatorH::OperatorH(RadialGrid grid) : grid_(std::move(grid)) {
  if (grid_.size() < 4) throw DomainError("OperatorH needs at least four nodes");
  potential_.resize(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) potential_[i] = potential(grid_[i]);
}

OperatorH::PotentialLimits OperatorH::potential_limit_check() const {
  PotentialLimits out;
  const double inner_hi = 10.0 * grid_.r_min();
  const double outer_lo = grid_.r_max() / 10.0;
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const double y = grid_[i];
    const double dev = std::abs(potential_[i] * y * y - 1.0);
    if (y <= inner_hi) out.inner = std::max(out.inner, dev);
    if (y >= outer_lo) out.outer = std::max(out.outer, dev);
  }
  return out;
}

namespace {

// Derivative of order `order` at node i from `width` nodes, shifted inward
// at the ends.
double nodal_fd(const RadialGrid& g, const std::vector<double>& f, std::size_t i, int order,
                std::size_t width) {
  const std::size_t n = g.size();
  std::size_t start = i >= width / 2 ? i - width / 2 : 0;
  start = std::min(start, n - width);
  std::array<double, 6> xs{};
  for (std::size_t j = 0; j < width; ++j) xs[j] = g[start + j];
  const auto w = fd_weights(g[i], std::span<const double>(xs.data(), width), order);
  double acc = 0.0;
  for (std::size_t j = 0; j < width; ++j) acc += w[j] * f[start + j];
  return acc;
}

void require_same_grid(const OperatorH& op, const RadialFunction& f) {
  if (!op.grid().same_nodes(f.grid())) throw GridMismatchError("function is not on the operator's grid");
}

// Row i of the conservative stencil multiplied by m_i:
// -[a_{i+1}(f_{i+1}-f_i) - a_i(f_i-f_{i-1})] + m_i V_i f_i, f_{-1} = 0.
double weighted_row(const OperatorH& op, const std::vector<double>& f, std::size_t i) {
  const auto& a = op.grid().faces();
  const auto& m = op.grid().measure();
  const double left = i == 0 ? 0.0 : f[i - 1];
  return -(a[i + 1] * (f[i + 1] - f[i]) - a[i] * (f[i] - left)) + m[i] * op.potential_samples()[i] * f[i];
}

// Interior-row measure: the trapezoid weight without the end-node halving.
double row_measure(const RadialGrid& g, std::size_t i) {
  return g.measure()[i];
}

}  // namespace

RadialFunction lambda_op(const RadialFunction& f) {
  const auto& g = f.grid();
  if (g.size() < 3) throw DomainError("lambda_op needs at least three nodes");
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] * nodal_fd(g, f.samples(), i, 1, 3);
  return RadialFunction(g, std::move(out));
}

RadialFunction apply_H(const OperatorH& op, const RadialFunction& f) {
  require_same_grid(op, f);
  const auto& g = op.grid();
  const std::size_t n = g.size();
  const auto& fs = f.samples();
  std::vector<double> out(n);
  for (std::size_t i = 0; i + 1 < n; ++i) out[i] = weighted_row(op, fs, i) / row_measure(g, i);
  const std::size_t last = n - 1;
  const double d2 = nodal_fd(g, fs, last, 2, 4);
  const double d1 = nodal_fd(g, fs, last, 1, 3);
  out[last] = -d2 - d1 / g[last] + op.potential_samples()[last] * fs[last];
  return RadialFunction(g, std::move(out));
}

double quadratic_form(const OperatorH& op, const RadialFunction& f) {
  require_same_grid(op, f);
  const auto& g = op.grid();
  const auto& a = g.faces();
  const auto& m = g.measure();
  double acc = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = f[i] - prev;
    acc += a[i] * d * d + m[i] * op.potential_samples()[i] * f[i] * f[i];
    prev = f[i];
  }
  return 2.0 * std::numbers::pi * acc;
}

RadialFunction discrete_kernel(const OperatorH& op) {
  const auto& g = op.grid();
  const auto& a = g.faces();
  const auto& m = g.measure();
  const auto& v = op.potential_samples();
  const std::size_t n = g.size();
  std::vector<double> j(n);
  j[0] = lambda_phi(g[0]);
  double prev = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    j[i + 1] = j[i] + (a[i] * (j[i] - prev) + m[i] * v[i] * j[i]) / a[i + 1];
    prev = j[i];
  }
  return RadialFunction(g, std::move(j), TailDescriptor{-1.0, 0, 1.0, 0});
}

RadialFunction second_solution(const OperatorH& op, const RadialFunction& kernel) {
  require_same_grid(op, kernel);
  const auto& a = op.grid().faces();
  const std::size_t n = kernel.size();
  std::vector<double> k(n, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (kernel[i] == 0.0 || kernel[i + 1] == 0.0) {
      throw SingularSourceError("discrete kernel vanishes; reduction of order is undefined");
    }
    sum += 1.0 / (a[i + 1] * kernel[i] * kernel[i + 1]);
    k[i + 1] = kernel[i + 1] * sum;
  }
  return RadialFunction(op.grid(), std::move(k), TailDescriptor{1.0, 0, -1.0, 0});
}

namespace {

void check_source(const RadialFunction& source) {
  const auto& g = source.grid();
  const double f0 = source[0];
  const double f1 = source[1];
  if (f0 != 0.0 && f1 != 0.0 && (f0 > 0.0) == (f1 > 0.0)) {
    const double p = std::log(std::abs(f1 / f0)) / std::log(g[1] / g[0]);
    if (p <= -3.0 + 1e-9) {
      std::ostringstream msg;
      msg << "source behaves like y^" << p << " near the origin and is not integrable against the kernel";
      throw SingularSourceError(msg.str());
    }
  }
}

// T_n = J_n sum_{j<n} m_j f_j K_j - K_n sum_{j<n} m_j f_j J_j, unit Wronskian.
std::vector<double> variation_of_parameters(const RadialGrid& g, const std::vector<double>& jk,
                                            const std::vector<double>& kk,
                                            const std::vector<double>& weighted_source) {
  const std::size_t n = g.size();
  std::vector<double> t(n, 0.0);
  double sum_k = 0.0;
  double sum_j = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    sum_k += weighted_source[i - 1] * kk[i - 1];
    sum_j += weighted_source[i - 1] * jk[i - 1];
    t[i] = jk[i] * sum_k - kk[i] * sum_j;
  }
  return t;
}

}  // namespace

RadialFunction solve_H(const OperatorH& op, const RadialFunction& source, const SolveOptions& options) {
  require_same_grid(op, source);
  check_source(source);
  const auto& g = op.grid();
  const std::size_t n = g.size();
  const RadialFunction jk = discrete_kernel(op);
  const RadialFunction kk = second_solution(op, jk);

  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = row_measure(g, i) * source[i];
  std::vector<double> t = variation_of_parameters(g, jk.samples(), kk.samples(), rhs);

  auto residual = [&](const std::vector<double>& x, std::vector<double>& r) {
    double rn = 0.0;
    double sn = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      r[i] = rhs[i] - weighted_row(op, x, i);
      rn += r[i] * r[i];
      sn += rhs[i] * rhs[i];
    }
    r[n - 1] = 0.0;
    return sn > 0.0 ? std::sqrt(rn / sn) : std::sqrt(rn);
  };
  std::vector<double> r(n);
  if (residual(t, r) > options.refine_tolerance) {
    const std::vector<double> dt = variation_of_parameters(g, jk.samples(), kk.samples(), r);
    for (std::size_t i = 0; i < n; ++i) t[i] += dt[i];
  }
  return RadialFunction(g, std::move(t));
}

RadialFunction profile_T01(const RadialGrid& grid, KernelGauge gauge) {
  const OperatorH op(grid);
  const RadialFunction source = RadialFunction::sample(grid, lambda_phi);
  std::vector<double> t = solve_H(op, source).samples();
  double power_zero = 3.0;
  if (gauge == KernelGauge::OrthogonalToResonance) {
    const RadialFunction jk = discrete_kernel(op);
    const auto& m = grid.measure();
    double tj = 0.0;
    double jj = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] > 10.0) break;
      const double w = m[i] * source[i];
      tj += w * t[i];
      jj += w * jk[i];
    }
    const double c = -tj / jj;
    for (std::size_t i = 0; i < grid.size(); ++i) t[i] += c * jk[i];
    power_zero = 1.0;
  }
  return RadialFunction(grid, std::move(t), TailDescriptor{1.0, 1, power_zero, 0});
}

RadialFunction profile_T01(const GridSpec& spec, KernelGauge gauge) {
  return profile_T01(RadialGrid::from_spec(spec), gauge);
}

double t01_tail_ratio(const RadialFunction& t01, double y) {
  if (!(y > std::numbers::e)) throw DomainError("tail ratio needs y > e");
  return t01.at(y) / (y * std::log(y) - y);
}

}  // namespace smap
