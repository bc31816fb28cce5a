#include "oracles/geometry_oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

namespace oracle {

namespace {

std::array<double, 3> q_k(int k, double y) {
  const double p = std::pow(y, k);
  const double d = 1.0 + p * p;
  return {2.0 * p / d, 0.0, (1.0 - p * p) / d};
}

}  // namespace

double harmonic_energy_quadrature(int k, double radius) {
  auto integrand = [k](double r) {
    if (r <= 0.0) return 0.0;
    const double h = 1e-6 * r;
    const auto qp = q_k(k, r + h);
    const auto qm = q_k(k, r - h);
    double d2 = 0.0;
    for (int c = 0; c < 3; ++c) d2 += std::pow((qp[c] - qm[c]) / (2.0 * h), 2);
    const auto q = q_k(k, r);
    return (d2 + k * k / (r * r) * (q[0] * q[0] + q[1] * q[1])) * r;
  };
  using boost::math::quadrature::gauss_kronrod;
  // split at the bubble scale so the adaptive rule sees the peak
  double acc = gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 15, 1e-13);
  acc += gauss_kronrod<double, 61>::integrate(integrand, 1.0, radius, 15, 1e-13);
  return 2.0 * std::numbers::pi * acc;
}

Triad frenet_by_differences(double y) {
  const double h = 1e-5 * std::max(y, 1e-3);
  const auto qp = q_k(1, y + h);
  const auto qm = q_k(1, y - h);
  std::array<double, 3> d{};
  double n = 0.0;
  for (int c = 0; c < 3; ++c) {
    d[c] = (qp[c] - qm[c]) / (2.0 * h);
    n += d[c] * d[c];
  }
  n = std::sqrt(n);
  for (auto& x : d) x /= n;
  // d/dtheta of e^{theta R} Q at theta = 0 is R Q = (-Q2, Q1, 0)
  return {d, {0.0, 1.0, 0.0}, q_k(1, y)};
}

}  // namespace oracle
