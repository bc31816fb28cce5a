#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smap/geometry.hpp"
#include "smap/radial_grid.hpp"
#include "smap/vec3.hpp"

namespace smap {

struct SolverConfig {
  /// Fixed time step; 0 selects dt_factor * (inner spacing)^2.
  double dt = 0.0;
  double dt_factor = 0.2;
  /// Fixed-point tolerance on the midpoint solve (max-norm of the update).
  double tolerance = 1e-12;
  int max_iterations = 80;
  /// Observed contraction factor above which a step is rejected.
  double contraction_limit = 0.5;
  /// Consecutive dt halvings allowed before the run aborts.
  int max_halvings = 8;
  /// Relative drift of the conserved (staggered) energy that stops a run.
  double energy_drift_abort = 1e-6;
  /// Record a diagnostic every this many accepted steps (and at the end).
  int diagnostic_every = 10;
  /// Keep a field snapshot each time t crosses a multiple of this interval
  /// (measured from the initial time); 0 disables.
  double snapshot_interval = 0.0;
  /// Extract lambda and Theta at each diagnostic.
  bool extract_modulation = true;
};

/// Throws ConfigError for values outside their domains.
void validate(const SolverConfig& cfg);

struct StopSpec {
  double t_end = 0.1;
  /// Stop once the extracted lambda drops below this value.
  std::optional<double> lambda_floor;
  /// Stop at lambda < 10 * (inner grid spacing).
  bool resolution_floor = false;
};

struct Diagnostic {
  double t = 0.0;
  double dt = 0.0;
  /// Conserved discrete energy (face differences).
  double energy = 0.0;
  /// Nodal three-point energy; not conserved exactly, drifts at O(h^2).
  double energy_trapezoid = 0.0;
  /// max-node | |v| - 1 | before and after the sphere projection of the last step.
  double norm_defect_before = 0.0;
  double norm_defect_after = 0.0;
  int iterations = 0;
  /// NaN when extraction is disabled or ambiguous.
  double lambda = 0.0;
  double theta = 0.0;
};

struct RunRecord {
  SolverConfig config;
  StopSpec stop;
  int degree = 1;
  std::vector<Diagnostic> diagnostics;
  std::vector<EquivariantProfile> snapshots;
  std::optional<EquivariantProfile> final_state;
  /// "t_end", "lambda_floor", "resolution_floor", "energy_drift" or "step_failure".
  std::string termination;
  std::size_t steps = 0;
  int halvings = 0;
  /// Worst post-projection norm defect over every accepted step.
  double max_norm_defect = 0.0;
  double energy_drift = 0.0;
  double energy_trapezoid_drift = 0.0;
  /// Extraction problems seen along the run (the run is not killed).
  std::vector<std::string> flags;
};

/// Right-hand side v x h of the semi-discrete flow with
/// h_i = (1/m_i)[a_{i+1}(v_{i+1}-v_i) - a_i(v_i-v_{i-1})] - (k^2/r_i^2)(v1, v2, 0).
/// The origin value is pinned; the last node is held fixed (zero rhs).
/// Throws CorruptedStateError on non-finite input.
std::vector<Vec3> equivariant_rhs(const EquivariantProfile& p);

struct StepOutcome {
  EquivariantProfile profile;
  int iterations = 0;
  double contraction = 0.0;
  double norm_defect_before = 0.0;
};

/// One implicit midpoint step solved by fixed-point iteration, then projected
/// to the sphere. Negative dt steps backwards. Throws StepFailure when the
/// iteration does not converge or contracts slower than cfg.contraction_limit.
StepOutcome step(const EquivariantProfile& p, double dt, const SolverConfig& cfg = {});

/// Time step used by evolve for this grid.
double default_dt(const RadialGrid& grid, const SolverConfig& cfg);

/// Advances until the first stop criterion. Repeated step failures end the
/// run with termination "step_failure" and the partial record.
RunRecord evolve(const EquivariantProfile& p0, const SolverConfig& cfg, const StopSpec& stop);

struct ConvergenceReport {
  std::vector<double> h;
  std::vector<double> errors;
  /// log(e_i / e_{i+1}) / log(h_i / h_{i+1}).
  std::vector<double> orders;
  /// e_i / e_{i+1}.
  std::vector<double> ratios;
  bool inconclusive = true;
};

/// Observed orders from (h, error) pairs sorted by decreasing h. Fewer than
/// three resolutions or non-monotone errors give an inconclusive report.
ConvergenceReport convergence_orders(std::vector<double> h, std::vector<double> errors);

/// Refinement over a ladder of grids: builds p0 on each grid, evolves to
/// t_end with dt = cfg.dt_factor h0^2, and measures `error` of the final
/// record against the initial profile.
using ErrorMeasure = std::function<double(const EquivariantProfile& initial, const RunRecord& run,
                                          const EquivariantProfile& final_state)>;
ConvergenceReport refinement_study(const std::function<EquivariantProfile(const RadialGrid&)>& family,
                                   const std::vector<GridSpec>& ladder, const SolverConfig& cfg, double t_end,
                                   const ErrorMeasure& error);

/// Temporal order on a fixed grid from successive differences of the final
/// states for dt, dt/2, dt/4, ... (at least three steps sizes).
ConvergenceReport temporal_study(const EquivariantProfile& p0, const SolverConfig& cfg, double t_end,
                                 const std::vector<double>& dts);

/// sup-norm distance between two profiles on the same grid.
double sup_distance(const EquivariantProfile& a, const EquivariantProfile& b);

}  // namespace smap
