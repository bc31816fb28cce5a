#pragma once

#include <vector>

#include "smap/radial_function.hpp"
#include "smap/radial_grid.hpp"

namespace smap {

/// phi(y) = 2 arctan(1/y): the polar angle of Q_1 measured from the south pole.
double phi(double y);
/// Closed form of y phi'(y) = -2y / (1 + y^2).
double lambda_phi(double y);
/// Potential of the linearized operator, (y^4 - 6y^2 + 1) / (y^2 (1+y^2)^2).
double potential(double y);

/// H = -(d^2/dy^2 + (1/y) d/dy) + V(y) discretized in conservative form
///
///   (H f)_i = -(1/m_i) [a_{i+1/2}(f_{i+1} - f_i) - a_{i-1/2}(f_i - f_{i-1})] + V_i f_i
///
/// with a the grid's face coefficients and m its trapezoid measure. The
/// implicit origin node carries f = 0, which selects the regular O(y)
/// branch. The last node has no right neighbour and uses one-sided
/// second-order differences instead.
class OperatorH {
 public:
  explicit OperatorH(RadialGrid grid);

  const RadialGrid& grid() const { return grid_; }
  const std::vector<double>& potential_samples() const { return potential_; }

  /// Relative deviation of V from 1/y^2 averaged over the innermost and
  /// outermost decade of the grid (each must be below 10%).
  struct PotentialLimits {
    double inner = 0.0;
    double outer = 0.0;
  };
  PotentialLimits potential_limit_check() const;

 private:
  RadialGrid grid_;
  std::vector<double> potential_;
};

/// Scaling generator y f'(y) by three-point differences (one-sided at the ends).
RadialFunction lambda_op(const RadialFunction& f);

RadialFunction apply_H(const OperatorH& op, const RadialFunction& f);

/// Quadratic form <Hf, f> with the conservative stencil summed by parts, so
/// that it is symmetric in the discrete L^2(r dr) inner product.
double quadratic_form(const OperatorH& op, const RadialFunction& f);

/// Discrete kernel of H regular at the origin, normalised so that
/// J(r_1) = lambda_phi(r_1). It converges to lambda_phi at second order.
RadialFunction discrete_kernel(const OperatorH& op);

/// Second homogeneous solution obtained from `kernel` by reduction of order
/// with the discrete Wronskian a_{i+1/2}(J_i K_{i+1} - J_{i+1} K_i) = 1.
RadialFunction second_solution(const OperatorH& op, const RadialFunction& kernel);

struct SolveOptions {
  /// Relative residual on interior nodes above which one step of iterative
  /// refinement is applied.
  double refine_tolerance = 1e-12;
};

/// Particular solution of H T = source that vanishes at the first node
/// (so it carries no component along the kernel's y^1 branch) and is
/// regular at the origin. Built by discrete variation of parameters from
/// `discrete_kernel` and `second_solution`. Growth at infinity is left free.
///
/// Throws SingularSourceError when the source is non-finite or grows at
/// least like y^{-3} towards the origin, where the source is not
/// integrable against the kernel.
RadialFunction solve_H(const OperatorH& op, const RadialFunction& source,
                       const SolveOptions& options = {});

/// How the free kernel multiple of T_{0,1} is fixed.
enum class KernelGauge {
  /// T_{0,1}(y) = O(y^3) at the origin: no y^1 component.
  Frobenius,
  /// Discrete <T_{0,1}, lambda_phi * chi> = 0 with chi = 1 on y <= 10.
  OrthogonalToResonance,
};

/// Radiation profile: H T = Lambda phi, T ~ y log y - y as y -> infinity.
RadialFunction profile_T01(const RadialGrid& grid, KernelGauge gauge = KernelGauge::Frobenius);
RadialFunction profile_T01(const GridSpec& spec, KernelGauge gauge = KernelGauge::Frobenius);

/// T(y) / (y log y - y) at a point inside the grid.
double t01_tail_ratio(const RadialFunction& t01, double y);

}  // namespace smap
