#include "smap/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "smap/errors.hpp"
#include "smap/modextract.hpp"

namespace smap {

void validate(const SolverConfig& cfg) {
  auto bad = [](const std::string& what) { throw ConfigError("solver: " + what); };
  if (!(cfg.dt >= 0.0) || !std::isfinite(cfg.dt)) bad("dt must be >= 0 (0 selects the default)");
  if (!(cfg.dt_factor > 0.0) || !std::isfinite(cfg.dt_factor)) bad("dt_factor must be positive");
  if (!(cfg.tolerance > 0.0)) bad("tolerance must be positive");
  if (cfg.max_iterations < 2) bad("max_iterations must be at least 2");
  if (!(cfg.contraction_limit > 0.0 && cfg.contraction_limit < 1.0)) bad("contraction_limit must lie in (0, 1)");
  if (cfg.max_halvings < 0) bad("max_halvings must be >= 0");
  if (!(cfg.energy_drift_abort > 0.0)) bad("energy_drift_abort must be positive");
  if (cfg.diagnostic_every < 1) bad("diagnostic_every must be >= 1");
  if (!(cfg.snapshot_interval >= 0.0) || !std::isfinite(cfg.snapshot_interval)) {
    bad("snapshot_interval must be >= 0");
  }
}

namespace {

struct Stencil {
  const RadialGrid& g;
  Vec3 origin;
  double k2;
};

void field_rhs(const Stencil& s, const std::vector<Vec3>& v, std::vector<Vec3>& out) {
  const auto& a = s.g.faces();
  const auto& m = s.g.measure();
  const std::size_t n = v.size();
  Vec3 left = s.origin;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Vec3& c = v[i];
    const Vec3& right = v[i + 1];
    const double r = s.g[i];
    Vec3 h = (a[i + 1] * (right - c) - a[i] * (c - left)) * (1.0 / m[i]);
    const double q = s.k2 / (r * r);
    h.x1 -= q * c.x1;
    h.x2 -= q * c.x2;
    out[i] = cross(c, h);
    left = c;
  }
  out[n - 1] = Vec3{0.0, 0.0, 0.0};
}

std::vector<Vec3> raw(const EquivariantProfile& p) {
  std::vector<Vec3> v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v[i] = p[i].vec();
  return v;
}

}  // namespace

std::vector<Vec3> equivariant_rhs(const EquivariantProfile& p) {
  const auto v = raw(p);
  for (const auto& x : v) {
    if (!is_finite(x)) throw CorruptedStateError("non-finite value in profile");
  }
  const int k = p.degree();
  Stencil s{p.grid(), p.origin_value().vec(), static_cast<double>(k) * k};
  std::vector<Vec3> out(v.size());
  field_rhs(s, v, out);
  return out;
}

StepOutcome step(const EquivariantProfile& p, double dt, const SolverConfig& cfg) {
  if (!(dt != 0.0) || !std::isfinite(dt)) throw DomainError("step needs a finite non-zero dt");
  const int k = p.degree();
  Stencil s{p.grid(), p.origin_value().vec(), static_cast<double>(k) * k};
  const std::vector<Vec3> v = raw(p);
  const std::size_t n = v.size();
  std::vector<Vec3> f(n), mid(n), x(n), xn(n);

  field_rhs(s, v, f);
  for (std::size_t i = 0; i < n; ++i) x[i] = v[i] + dt * f[i];

  double first_diff = 0.0, diff = 0.0;
  int it = 0;
  bool converged = false;
  for (it = 1; it <= cfg.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (v[i] + x[i]);
    field_rhs(s, mid, f);
    diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      xn[i] = v[i] + dt * f[i];
      const Vec3 d = xn[i] - x[i];
      diff = std::max({diff, std::abs(d.x1), std::abs(d.x2), std::abs(d.x3)});
    }
    if (!std::isfinite(diff)) throw CorruptedStateError("non-finite value during the midpoint solve");
    std::swap(x, xn);
    if (it == 1) first_diff = diff;
    if (diff <= cfg.tolerance) {
      converged = true;
      break;
    }
    if (it >= 4) {
      const double rate = std::pow(diff / first_diff, 1.0 / (it - 1));
      if (rate > cfg.contraction_limit) {
        std::ostringstream msg;
        msg << "fixed-point contraction " << rate << " above " << cfg.contraction_limit << " at dt = " << dt;
        throw StepFailure(msg.str());
      }
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "midpoint iteration did not converge in " << cfg.max_iterations << " iterations (last update " << diff
        << ")";
    throw StepFailure(msg.str());
  }

  StepOutcome out{p, it, 0.0, 0.0};
  out.contraction = it > 1 && first_diff > 0.0 ? std::pow(diff / first_diff, 1.0 / (it - 1)) : 0.0;
  std::vector<SphereVec> vals(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.norm_defect_before = std::max(out.norm_defect_before, std::abs(norm(x[i]) - 1.0));
    vals[i] = SphereVec::project(x[i]);
  }
  out.profile = EquivariantProfile(p.grid(), std::move(vals), k, p.time() + dt);
  return out;
}

double default_dt(const RadialGrid& grid, const SolverConfig& cfg) {
  if (cfg.dt > 0.0) return cfg.dt;
  const double h0 = grid.inner_spacing();
  return cfg.dt_factor * h0 * h0;
}

namespace {

double norm_defect(const EquivariantProfile& p) {
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(norm(p[i].vec()) - 1.0));
  return worst;
}

}  // namespace

RunRecord evolve(const EquivariantProfile& p0, const SolverConfig& cfg, const StopSpec& stop) {
  validate(cfg);
  if (!(stop.t_end > p0.time())) throw ConfigError("solver: t_end must exceed the initial time");
  if (stop.lambda_floor && !(*stop.lambda_floor > 0.0)) throw ConfigError("solver: lambda_floor must be positive");

  RunRecord rec;
  rec.config = cfg;
  rec.stop = stop;
  rec.degree = p0.degree();

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double e0 = dirichlet_energy(p0, Quadrature::Staggered);
  const double et0 = dirichlet_energy(p0, Quadrature::Trapezoid);
  const double resolution = 10.0 * p0.grid().inner_spacing();
  const double eref = std::max(std::abs(e0), std::numeric_limits<double>::min());
  const double etref = std::max(std::abs(et0), std::numeric_limits<double>::min());

  std::optional<double> last_lambda, last_theta;
  auto diagnose = [&](const EquivariantProfile& p, double dt, const StepOutcome* so) {
    Diagnostic d;
    d.t = p.time();
    d.dt = dt;
    d.energy = dirichlet_energy(p, Quadrature::Staggered);
    d.energy_trapezoid = dirichlet_energy(p, Quadrature::Trapezoid);
    d.norm_defect_after = norm_defect(p);
    if (so) {
      d.norm_defect_before = so->norm_defect_before;
      d.iterations = so->iterations;
    }
    d.lambda = nan;
    d.theta = nan;
    if (cfg.extract_modulation) {
      try {
        d.lambda = extract_lambda(p, last_lambda);
        last_lambda = d.lambda;
        d.theta = extract_theta(p, d.lambda, last_theta);
        last_theta = d.theta;
      } catch (const Error& e) {
        if (rec.flags.size() < 32) {
          std::ostringstream msg;
          msg << "t=" << d.t << ": " << e.what();
          rec.flags.push_back(msg.str());
        }
      }
    }
    rec.diagnostics.push_back(d);
    return d;
  };

  EquivariantProfile p = p0;
  double dt = default_dt(p0.grid(), cfg);
  diagnose(p, dt, nullptr);
  std::size_t snapshot_count = 0;
  auto maybe_snapshot = [&]() {
    if (cfg.snapshot_interval <= 0.0) return;
    const double due = p0.time() + static_cast<double>(snapshot_count) * cfg.snapshot_interval;
    if (p.time() >= due - 1e-12 * std::max(1.0, std::abs(due))) {
      rec.snapshots.push_back(p);
      while (p0.time() + static_cast<double>(snapshot_count) * cfg.snapshot_interval <= p.time() + 1e-12) {
        ++snapshot_count;
      }
    }
  };
  maybe_snapshot();
  rec.max_norm_defect = norm_defect(p);

  int consecutive = 0;
  std::optional<StepOutcome> last;
  bool recorded_last = true;
  while (true) {
    const double t = p.time();
    const double remaining = stop.t_end - t;
    if (remaining <= 1e-12 * std::max(1.0, std::abs(stop.t_end))) {
      rec.termination = "t_end";
      break;
    }
    const double h = remaining < dt * (1.0 + 1e-9) ? remaining : dt;
    try {
      last = step(p, h, cfg);
    } catch (const StepFailure&) {
      ++rec.halvings;
      if (++consecutive > cfg.max_halvings) {
        rec.termination = "step_failure";
        break;
      }
      dt *= 0.5;
      continue;
    }
    consecutive = 0;
    ++rec.steps;
    // A shortened final step lands exactly on t_end.
    const double tn = h == dt ? t + h : stop.t_end;
    p = last->profile.with_time(tn);
    rec.max_norm_defect = std::max(rec.max_norm_defect, norm_defect(p));
    recorded_last = false;
    maybe_snapshot();

    const double e = dirichlet_energy(p, Quadrature::Staggered);
    const bool drift_exceeded = std::abs(e - e0) / eref > cfg.energy_drift_abort;
    const bool at_end = stop.t_end - tn <= 1e-12 * std::max(1.0, std::abs(stop.t_end));
    if (drift_exceeded || at_end || rec.steps % static_cast<std::size_t>(cfg.diagnostic_every) == 0) {
      const Diagnostic d = diagnose(p, h, &*last);
      recorded_last = true;
      if (drift_exceeded) {
        rec.termination = "energy_drift";
        break;
      }
      if (std::isfinite(d.lambda)) {
        if (stop.lambda_floor && d.lambda < *stop.lambda_floor) {
          rec.termination = "lambda_floor";
          break;
        }
        if (stop.resolution_floor && d.lambda < resolution) {
          rec.termination = "resolution_floor";
          break;
        }
      }
    }
  }
  if (!recorded_last) diagnose(p, dt, last ? &*last : nullptr);

  const auto& fin = rec.diagnostics.back();
  rec.energy_drift = std::abs(fin.energy - e0) / eref;
  rec.energy_trapezoid_drift = std::abs(fin.energy_trapezoid - et0) / etref;
  rec.final_state = p;
  return rec;
}

ConvergenceReport convergence_orders(std::vector<double> h, std::vector<double> errors) {
  if (h.size() != errors.size()) throw DomainError("convergence_orders: size mismatch");
  std::vector<std::size_t> idx(h.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return h[a] > h[b]; });
  ConvergenceReport rep;
  for (std::size_t i : idx) {
    rep.h.push_back(h[i]);
    rep.errors.push_back(errors[i]);
  }
  bool monotone = rep.h.size() >= 2;
  for (std::size_t i = 0; i + 1 < rep.h.size(); ++i) {
    const double e0 = rep.errors[i];
    const double e1 = rep.errors[i + 1];
    if (!(e0 > 0.0 && e1 > 0.0 && e1 < e0)) monotone = false;
    const double ratio = e0 / e1;
    rep.ratios.push_back(ratio);
    rep.orders.push_back(std::log(ratio) / std::log(rep.h[i] / rep.h[i + 1]));
  }
  rep.inconclusive = !monotone;
  return rep;
}

ConvergenceReport refinement_study(const std::function<EquivariantProfile(const RadialGrid&)>& family,
                                   const std::vector<GridSpec>& ladder, const SolverConfig& cfg, double t_end,
                                   const ErrorMeasure& error) {
  std::vector<double> hs, errs;
  for (const auto& spec : ladder) {
    const RadialGrid grid = RadialGrid::from_spec(spec);
    const EquivariantProfile p0 = family(grid);
    SolverConfig c = cfg;
    c.dt = 0.0;
    StopSpec stop;
    stop.t_end = p0.time() + t_end;
    const RunRecord run = evolve(p0, c, stop);
    hs.push_back(grid.inner_spacing());
    errs.push_back(error(p0, run, *run.final_state));
  }
  ConvergenceReport rep = convergence_orders(hs, errs);
  if (ladder.size() < 3) rep.inconclusive = true;
  return rep;
}

ConvergenceReport temporal_study(const EquivariantProfile& p0, const SolverConfig& cfg, double t_end,
                                 const std::vector<double>& dts) {
  std::vector<EquivariantProfile> finals;
  for (double dt : dts) {
    SolverConfig c = cfg;
    c.dt = dt;
    c.extract_modulation = false;
    StopSpec stop;
    stop.t_end = p0.time() + t_end;
    finals.push_back(*evolve(p0, c, stop).final_state);
  }
  std::vector<double> hs, errs;
  for (std::size_t i = 0; i + 1 < finals.size(); ++i) {
    hs.push_back(dts[i]);
    errs.push_back(sup_distance(finals[i], finals[i + 1]));
  }
  ConvergenceReport rep = convergence_orders(hs, errs);
  if (dts.size() < 3) rep.inconclusive = true;
  return rep;
}

double sup_distance(const EquivariantProfile& a, const EquivariantProfile& b) {
  if (!a.grid().same_nodes(b.grid())) throw GridMismatchError("profiles live on different grids");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, norm(a[i].vec() - b[i].vec()));
  return worst;
}

}  // namespace smap
