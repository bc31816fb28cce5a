#pragma once

#include <optional>
#include <string>

#include "smap/geometry.hpp"
#include "smap/linops.hpp"
#include "smap/radial_grid.hpp"

namespace smap {

/// C^2 monotone cutoff: 1 on [0, 1], 0 on [2, inf), quintic smoothstep between.
double smooth_cutoff(double x);

struct BlowupDataSpec {
  double lambda0 = 1.0;
  double b0 = 0.01;
  /// Phase-speed seed. Recorded in the provenance only: the first-order
  /// profile carries no alpha component.
  double a0 = 0.0;
  double theta0 = 0.0;
  /// Cutoff scale B0 in y; unset selects 1/sqrt(b0).
  std::optional<double> cutoff;
  GridSpec grid;
  KernelGauge gauge = KernelGauge::Frobenius;
  double b_ceiling = 0.1;
  /// Bound on sup |beta0| over the cutoff support.
  double smallness = 0.5;

  double cutoff_scale() const;
};

/// Throws ConfigError for parameters outside their domains.
void validate(const BlowupDataSpec& spec);

/// First-order profile -b T01(y) chi(y / B0) on a y-grid. The sign follows
/// u_t = u x Delta u in the frame (e_r, e_tau, Q): the linearized equation
/// reads H beta = -b Lambda phi there, and this sign concentrates the bubble.
RadialFunction first_order_beta(double b, double cutoff, const RadialGrid& y_grid,
                                KernelGauge gauge = KernelGauge::Frobenius);

/// u0 = e^{theta0 R}[beta0 e_tau + (1 + gamma0) Q](r / lambda0) with
/// gamma0 = sqrt(1 - beta0^2) - 1 and beta0 = first_order_beta(b0, B0).
/// Throws SmallnessViolation (with the offending sup) when sup |beta0| reaches
/// spec.smallness.
EquivariantProfile build_blowup_data(const BlowupDataSpec& spec);
EquivariantProfile build_blowup_data(const BlowupDataSpec& spec, const RadialGrid& grid);

/// sup |b0 T01 chi(y/B0)| that build_blowup_data would produce.
double blowup_data_sup(const BlowupDataSpec& spec);

/// JSON provenance (lambda0, b0, a0, theta0, B0, grid).
std::string provenance_json(const BlowupDataSpec& spec);
/// Profile at `path` plus the provenance sidecar at `path`.json.
void save_blowup_data(const EquivariantProfile& p, const BlowupDataSpec& spec, const std::string& path);

struct ClosenessReport {
  /// E(p) - E(bubble) with the conserved quadrature on the profile's grid.
  double energy_excess = 0.0;
  /// Reduced homogeneous H^1 seminorm of v - v_bubble.
  double h1_distance = 0.0;
};

ClosenessReport closeness_report(const EquivariantProfile& p, double lambda0, double theta0);

/// Q_k + amplitude * psi(r) (cos(w r) e_r + sin(w r) e_tau), projected, with
/// psi(r) = r^2/(1+r^2) exp(-((r - center)/width)^2) and (e_r, e_tau) the
/// tangent frame of Q_k. A smooth wave packet that keeps the pinned origin
/// value; w = 0 gives a standing bump along e_r.
EquivariantProfile perturbed_ground_state(int k, const RadialGrid& grid, double amplitude, double center = 3.0,
                                          double width = 1.0, double wavenumber = 4.0);

}  // namespace smap
