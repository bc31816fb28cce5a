#pragma once

#include <cstdint>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "smap/geometry.hpp"
#include "smap/initdata.hpp"
#include "smap/modextract.hpp"
#include "smap/modulation_ode.hpp"
#include "smap/pde_solver.hpp"
#include "smap/radial_grid.hpp"

namespace smap {

/// Directory for run output: $SMAP_OUTPUT_ROOT, or "runs" when unset.
std::string output_root();

enum class InitialKind {
  /// initdata blow-up profile
  Blowup,
  GroundState,
  /// Q_k plus the smooth wave packet of `perturbed_ground_state`
  Perturbed,
  /// Q_k plus a packet whose centre, width and wavenumber are drawn from `seed`
  RandomPacket,
};
std::string to_string(InitialKind k);
InitialKind initial_kind_from_string(const std::string& s);

/// Everything a subcommand needs. Blocks a subcommand does not use are
/// carried along unchanged so one file can drive several commands.
struct RunConfig {
  std::string command;
  std::uint64_t seed = 0;
  std::string output_dir;

  // evolve
  GridSpec grid;
  SolverConfig solver;
  StopSpec stop;
  InitialKind initial = InitialKind::Blowup;
  int degree = 1;
  double perturbation = 1e-2;
  BlowupDataSpec initdata;

  // ode / fit
  ModState ode_state;
  ModelParams model;
  StopCriteria ode_stop;
  IntegratorOptions integrator;
  FitOptions fit;
};

/// Rejects every domain violation of the blocks used by `cfg.command`
/// (ConfigError) before any computation starts.
void validate(const RunConfig& cfg);

nlohmann::json to_json(const RunConfig& cfg);
/// Missing keys keep their defaults; unknown enum strings throw ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);

/// Initial profile described by the evolve block. The initdata spec uses
/// `cfg.grid` as its grid.
EquivariantProfile initial_profile(const RunConfig& cfg);

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);

struct ManifestEntry {
  /// Relative to the run directory.
  std::string path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  /// Hash over the sorted (path, sha256) pairs.
  std::string digest() const;
};

/// "t,dt,energy,energy_trapezoid,norm_defect_before,norm_defect_after,iterations,lambda,theta"
void write_diagnostics_csv(std::ostream& out, const std::vector<Diagnostic>& diagnostics);
std::vector<Diagnostic> read_diagnostics_csv(std::istream& in);

/// Writes config.json, summary.json, diagnostics.csv, snapshots/NNNN.profile,
/// final.profile and manifest.json under `dir` (created if needed). Throws
/// IoError naming the path on failure.
Manifest persist_run(const RunRecord& record, const RunConfig& config, const std::string& dir);

struct PersistedRun {
  RunConfig config;
  RunRecord record;
  Manifest manifest;
};
PersistedRun load_run(const std::string& dir);

/// Paths listed in the manifest whose content no longer matches (or that are
/// missing). Empty when the run directory is intact.
std::vector<std::string> verify_manifest(const std::string& dir);

enum class PlotKind { RateRatio, Trajectory, TailCheck };
std::string to_string(PlotKind k);
PlotKind plot_kind_from_string(const std::string& s);

/// Whitespace-separated columns under a header line naming them.
///
/// rate-ratio: t, T_minus_t, lambda, ratio = lambda |log(T-t)|^2 / (T-t);
/// needs the fit (ConfigError without one).
void emit_rate_ratio(std::ostream& out, const ModTrajectory& traj, const std::optional<FitResult>& fit);
/// trajectory: s, t, lambda, b, theta, a
void emit_trajectory(std::ostream& out, const ModTrajectory& traj);
/// trajectory of a PDE run: t, lambda, b, theta, a
void emit_trajectory(std::ostream& out, const ModSeries& series);
/// tail-check: y, T01, y_log_y_minus_y, ratio (rows with y > e)
void emit_tail_check(std::ostream& out, const RadialFunction& t01);

/// Snapshots of a run turned into a modulation series: lambda and
/// Theta are extracted with warm starts, then b and a by finite differences.
/// Snapshots where extraction fails are dropped.
ModSeries snapshot_series(const std::vector<EquivariantProfile>& snapshots);

}  // namespace smap
