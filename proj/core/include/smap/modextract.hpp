#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "smap/geometry.hpp"
#include "smap/radial_function.hpp"

namespace smap {

/// Scale of the bubble: the zero of v3 located by bracketing and linear
/// interpolation between the two nodes around the sign change. With several
/// sign changes, `previous` selects the one closest to it; without it the
/// profile is ambiguous (ExtractionAmbiguousError). Also thrown when v3 never
/// changes sign.
double extract_lambda(const EquivariantProfile& p, std::optional<double> previous = std::nullopt);

/// Planar angle of (v1, v2) at r = lambda, shifted by a multiple of 2 pi to
/// lie within pi of `previous` when given. Throws DegeneratePhaseError when
/// |(v1, v2)| < 1e-8 there.
double extract_theta(const EquivariantProfile& p, double lambda, std::optional<double> previous = std::nullopt);

struct ModSample {
  double t = 0.0;
  double lambda = 0.0;
  double theta = 0.0;
  double b = 0.0;
  double a = 0.0;
  /// Derivatives taken from a one-sided stencil (series endpoints).
  bool one_sided = false;
};

struct ModSeries {
  std::vector<ModSample> samples;
};

/// b = -lambda_t lambda and a = -Theta_t lambda^2 from three-point finite
/// differences on the (possibly non-uniform) t samples, one-sided at the
/// ends. Throws DomainError for fewer than three samples, non-increasing t,
/// mismatched lengths or lambda <= 0.
ModSeries extract_b_a(const std::vector<double>& t, const std::vector<double>& lambda,
                      const std::vector<double>& theta);

/// Remainder w = alpha + i beta (with gamma) of a profile against the
/// rescaled, rotated ground state, on the matching y-grid.
struct RemainderField {
  FrenetTriple w;
  double lambda = 1.0;
  double theta = 0.0;

  const RadialGrid& grid() const { return w.alpha.grid(); }
};

RemainderField remainder(const EquivariantProfile& p, double lambda, double theta);

/// Remainder with a reference profile removed from beta (for instance the
/// first-order approximate profile). `beta_reference` must live on the
/// remainder's y-grid.
RemainderField subtract_beta(const RemainderField& w, const RadialFunction& beta_reference);

struct SobolevReport {
  /// || H^2 alpha ||_{L^2} and || H^2 beta ||_{L^2} with the 2-D measure.
  double alpha_norm = 0.0;
  double beta_norm = 0.0;
  /// sqrt(alpha_norm^2 + beta_norm^2)
  double norm = 0.0;
  /// norm * |log b| / b^2
  double monitor = 0.0;
};

/// Throws DomainError unless 0 < b < b_ceiling.
SobolevReport sobolev_diagnostic(const RemainderField& w, double b, double b_ceiling = 0.1);

/// CSV "t,lambda,b,theta,a".
void write_mod_series_csv(std::ostream& out, const ModSeries& series);

}  // namespace smap
