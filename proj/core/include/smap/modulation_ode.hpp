#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace smap {

enum class ModVariant {
  /// b_s = -b^2 - a^2, a_s = 0.
  LeadingOrder,
  /// b_s = -b^2 - c b^2/|log b| - a^2, a_s = -2ab/|log b|.
  LogCorrected,
};

std::string to_string(ModVariant v);
ModVariant mod_variant_from_string(const std::string& name);

struct ModelParams {
  ModVariant variant = ModVariant::LogCorrected;
  double b_ceiling = 0.1;
  /// Coefficient c of the b^2/|log b| correction.
  double log_coefficient = 0.5;
};

/// Modulation state: scale, concentration speed, phase, phase speed and the
/// renormalized and physical clocks.
struct ModState {
  double lambda = 1.0;
  double b = 0.0;
  double theta = 0.0;
  double a = 0.0;
  double s = 0.0;
  double t = 0.0;
};

/// d/ds of (b, a, lambda, Theta, t).
struct ModDerivative {
  double b_s = 0.0;
  double a_s = 0.0;
  double lambda_s = 0.0;
  double theta_s = 0.0;
  double t_s = 0.0;
};

/// Throws DomainError for the log-corrected variant unless 0 < b < b_ceiling.
ModDerivative mod_rhs(const ModState& state, const ModelParams& params);

struct StopCriteria {
  double lambda_floor = 1e-40;
  double s_budget = std::numeric_limits<double>::infinity();
};

struct IntegratorOptions {
  double rtol = 1e-10;
  double initial_step = 1e-3;
  std::size_t max_steps = 5'000'000;
};

enum class Termination { LambdaFloor, BCrossedZero, SBudget };
std::string to_string(Termination t);

/// Accepted integrator steps. `increments[n]` is the physical time elapsed
/// between samples n and n+1, integrated directly rather than differenced,
/// so it stays accurate when t itself stops resolving T - t in double
/// precision. The samples' t is the running sum of the increments.
struct ModTrajectory {
  ModelParams params;
  std::vector<ModState> samples;
  std::vector<double> increments;
  Termination reason = Termination::SBudget;

  const ModState& back() const { return samples.back(); }
  /// S_n = sum_{j >= n} increments[j]: physical time from sample n to the end.
  std::vector<double> remaining_time() const;
};

/// Dormand-Prince 5(4) in the variables (log lambda, b, a, Theta, dt) with
/// Hairer's dense output. Events (lambda floor, b crossing) are located by
/// bisection on the dense output and the final step is then recomputed to
/// land on the event. For the log-corrected variant "b crossed zero" fires at
/// b <= 1e-6 |a|, before |log b| degenerates.
///
/// Throws StiffnessError when the step size underflows or the step budget
/// is exhausted; the message carries the state at failure.
ModTrajectory integrate(const ModState& state0, const ModelParams& params, const StopCriteria& stop = {},
                        const IntegratorOptions& options = {});

/// Fit of lambda = kappa (T - t) / |log(T - t)|^2 over the final decades.
struct FitResult {
  /// Blow-up time estimate. When the remaining time is below the resolution
  /// of t_end it rounds to t_end; `remaining` keeps the exact offset.
  double T = 0.0;
  /// T - t at the last sample.
  double remaining = 0.0;
  double kappa = 0.0;
  /// Max relative deviation of the model on the fit window.
  double residual = 0.0;
  /// max/min - 1 of lambda |log(T - t)|^2 / (T - t) on the window.
  double ratio_variation = 0.0;
  std::size_t window_size = 0;
};

struct FitOptions {
  double decades = 2.0;
};

/// Throws FitWindowError unless the trajectory reached the lambda floor with
/// at least `decades` of dynamic range in T - t.
FitResult fit_blowup_law(const ModTrajectory& traj, const FitOptions& options = {});

/// lambda = c (T - t) by linear least squares in relative deviation over the
/// whole trajectory. `kappa` holds c.
FitResult fit_linear_law(const ModTrajectory& traj);

struct GrowthReport {
  ModTrajectory trajectory;
  /// rho = a / (b / |log b|) per sample.
  std::vector<double> rho;
  bool monotone = false;
};

/// Integrates the log-corrected system from lambda = 1, a0 = epsilon b0/|log b0|
/// and checks whether rho grows monotonically in the direction of its sign.
/// For epsilon = 0, monotone means rho is identically zero.
GrowthReport instability_probe(double b0, double epsilon, const ModelParams& params = {},
                               const StopCriteria& stop = {}, const IntegratorOptions& options = {});

/// CSV with header "s,t,lambda,b,theta,a".
void write_trajectory_csv(std::ostream& out, const ModTrajectory& traj);
std::string fit_result_json(const FitResult& fit);

}  // namespace smap
