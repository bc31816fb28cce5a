#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "smap/radial_function.hpp"
#include "smap/radial_grid.hpp"
#include "smap/vec3.hpp"

namespace smap {

/// Full state of the k-equivariant reduction u = e^{k theta R} v(r): the
/// sphere-valued radial profile v sampled on a grid, with its degree and
/// the physical time it belongs to.
class EquivariantProfile {
 public:
  EquivariantProfile(RadialGrid grid, std::vector<SphereVec> values, int degree, double time = 0.0);

  const RadialGrid& grid() const { return grid_; }
  const std::vector<SphereVec>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  const SphereVec& operator[](std::size_t i) const { return values_[i]; }
  int degree() const { return degree_; }
  double time() const { return time_; }
  EquivariantProfile with_time(double t) const;

  /// Limit of v at the origin: the north pole for k >= 0, the south pole
  /// for k < 0 (where Q_k(0+) = (0,0,-1)).
  SphereVec origin_value() const;

  /// Largest |v(r_1) - v(0)| and |v(r_max) - Q_k(r_max)|.
  struct BoundaryDefect {
    double inner = 0.0;
    double outer = 0.0;
  };
  BoundaryDefect boundary_defect() const;

  /// Component samples (1, 2 or 3).
  std::vector<double> component(int which) const;

 private:
  RadialGrid grid_;
  std::vector<SphereVec> values_;
  int degree_ = 1;
  double time_ = 0.0;
};

/// Q_k(y) at polar angle 0: (2y^k/(1+y^{2k}), 0, (1-y^{2k})/(1+y^{2k})).
SphereVec harmonic_map_profile(int k, double y);

/// e^{theta R} Q_k(r / lambda) sampled on `grid`.
EquivariantProfile harmonic_map(int k, const RadialGrid& grid, double lambda = 1.0, double theta = 0.0);

/// Constant map to the north pole; degree 0, used as a gradient-free fixture.
EquivariantProfile north_pole_profile(const RadialGrid& grid);

/// Frenet triad of Q_1 at a single point y > 0 (polar angle 0).
struct FrenetTriad {
  SphereVec e_r;
  SphereVec e_tau;
  SphereVec q;
};
FrenetTriad frenet_frame(double y);

/// Frenet triads of Q_1 over a grid.
struct Frame {
  RadialGrid grid;
  std::vector<SphereVec> e_r;
  std::vector<SphereVec> e_tau;
  std::vector<SphereVec> q;
};
Frame frenet_frame(const RadialGrid& grid);

enum class Quadrature {
  /// Nodal three-point derivatives, trapezoid weights in r dr.
  Trapezoid,
  /// Face differences for the gradient term and trapezoid weights for the
  /// angular term. This is the discrete energy the PDE integrator conserves.
  Staggered,
};

/// Reduced Dirichlet energy 2*pi * int (|v'|^2 + k^2/r^2 (v1^2 + v2^2)) r dr
/// on [0, r_max].
double dirichlet_energy(const EquivariantProfile& p, Quadrature rule = Quadrature::Trapezoid);

/// Exact energy of Q_k restricted to the disc of radius R/lambda in y:
/// 8 pi |k| R^{2|k|} / (1 + R^{2|k|}).
double harmonic_map_energy(int k, double radius);

/// Coordinates of a profile in the Frenet frame of the rescaled, rotated
/// ground state: v(lambda y) = e^{theta R}[alpha e_r + beta e_tau + (1+gamma) Q](y).
struct FrenetTriple {
  RadialFunction alpha;
  RadialFunction beta;
  RadialFunction gamma;

  /// max_i |alpha^2 + beta^2 + (1+gamma)^2 - 1|
  double constraint_residual() const;
};

/// Decomposition on the matching y-grid (the profile's nodes divided by
/// lambda); no interpolation is involved.
FrenetTriple frenet_decompose(const EquivariantProfile& p, double lambda, double theta);

/// Decomposition sampled on an arbitrary y-grid; lambda * y must stay inside
/// the profile's grid, otherwise OutOfDomainError.
FrenetTriple frenet_decompose(const EquivariantProfile& p, double lambda, double theta,
                              const RadialGrid& y_grid);

/// Inverse of the decomposition, projected to the sphere. The triple must
/// satisfy the pointwise constraint within `constraint_tol`.
EquivariantProfile frenet_reconstruct(const RadialFunction& alpha, const RadialFunction& beta,
                                      const RadialFunction& gamma, double lambda, double theta,
                                      const RadialGrid& grid, double constraint_tol = 1e-8);

/// Columnar text: header "k N r_max", a "# time" comment, then "r v1 v2 v3"
/// rows in full double precision.
void write_profile(std::ostream& out, const EquivariantProfile& p);
EquivariantProfile read_profile(std::istream& in);
void save_profile(const EquivariantProfile& p, const std::string& path);
EquivariantProfile load_profile(const std::string& path);

}  // namespace smap
