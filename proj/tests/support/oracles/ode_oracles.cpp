#include "oracles/ode_oracles.hpp"

#include <array>
#include <boost/numeric/odeint.hpp>

namespace oracle {

namespace {

double pot(double y) {
  const double y2 = y * y;
  const double d = 1.0 + y2;
  return (y2 * y2 - 6.0 * y2 + 1.0) / (y2 * d * d);
}

double resonance(double y) { return -2.0 * y / (1.0 + y * y); }

}  // namespace

std::vector<double> solve_radial(double (*source)(double), double y0, double t0, double dt0,
                                 const std::vector<double>& ys) {
  using state = std::array<double, 2>;
  namespace odeint = boost::numeric::odeint;
  auto rhs = [source](const state& s, state& ds, double y) {
    ds[0] = s[1];
    ds[1] = -s[1] / y + pot(y) * s[0] - source(y);
  };
  auto stepper = odeint::make_dense_output(1e-13, 1e-13, odeint::runge_kutta_dopri5<state>());
  state s{t0, dt0};
  std::vector<double> out;
  out.reserve(ys.size());
  double y = y0;
  for (double target : ys) {
    if (target > y) {
      odeint::integrate_adaptive(stepper, rhs, s, y, target, 1e-4 * target);
      y = target;
    }
    out.push_back(s[0]);
  }
  return out;
}

std::vector<double> t01_frobenius(const std::vector<double>& ys) {
  const double y0 = 1e-4;
  return solve_radial(resonance, y0, 0.25 * y0 * y0 * y0, 0.75 * y0 * y0, ys);
}

}  // namespace oracle
