#include "smap/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "smap/errors.hpp"
#include "smap/geometry.hpp"
#include "smap/harness.hpp"
#include "smap/initdata.hpp"
#include "smap/interp.hpp"
#include "smap/linops.hpp"
#include "smap/modextract.hpp"
#include "smap/modulation_ode.hpp"
#include "smap/pde_solver.hpp"

namespace smap {

namespace {

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(3);
  s << x;
  return s.str();
}

bool near_four(double ratio) { return ratio >= 3.0 && ratio <= 5.0; }

struct Artifacts {
  std::string dir;
  std::optional<std::ofstream> open(const std::string& name) const {
    if (dir.empty()) return std::nullopt;
    std::filesystem::create_directories(dir);
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw IoError("cannot write '" + (std::filesystem::path(dir) / name).string() + "'");
    return out;
  }
};

const char* const kTitles[] = {"",
                                "sphere constraint after every step",
                                "energy conservation",
                                "stationarity of Q_k",
                                "resonance of H",
                                "radiation profile tail",
                                "leading-order law",
                                "rate law of the modulation ODE",
                                "codimension-one instability",
                                "PDE concentration",
                                "decomposition round trips",
                                "diagnostic monitor"};

CriterionResult titled(int id) {
  CriterionResult r;
  r.id = id;
  r.title = kTitles[id];
  return r;
}

CriterionResult sphere_constraint() {
  auto r = titled(1);
  SolverConfig cfg;
  cfg.extract_modulation = false;
  StopSpec stop;
  stop.t_end = 0.01;
  const auto a = evolve(perturbed_ground_state(3, RadialGrid::geometric(512, 50.0, 4.0), 1e-2), cfg, stop);

  BlowupDataSpec spec;
  spec.b0 = 0.1;
  spec.b_ceiling = 0.2;
  spec.cutoff = 4.5;
  spec.grid = GridSpec{Spacing::GeometricStretch, 400, 50.0, 4.0};
  stop.t_end = 0.1;
  const auto b = evolve(build_blowup_data(spec), cfg, stop);

  const double worst = std::max(a.max_norm_defect, b.max_norm_defect);
  r.pass = worst <= 1e-12 && a.termination == "t_end" && b.termination == "t_end";
  r.detail = "max defect " + fmt(worst) + " over " + std::to_string(a.steps + b.steps) + " steps";
  return r;
}

CriterionResult energy_conservation() {
  auto r = titled(2);
  SolverConfig cfg;
  cfg.extract_modulation = false;
  StopSpec stop;
  stop.t_end = 0.1;
  std::vector<double> cons, trap;
  for (std::size_t n : {1024, 2048, 4096}) {
    const auto run = evolve(perturbed_ground_state(3, RadialGrid::geometric(n, 50.0, 4.0), 1e-2), cfg, stop);
    if (run.termination != "t_end") {
      r.detail = "N=" + std::to_string(n) + " ended with " + run.termination;
      return r;
    }
    cons.push_back(run.energy_drift);
    trap.push_back(run.energy_trapezoid_drift);
  }
  const double r1 = trap[0] / trap[1], r2 = trap[1] / trap[2];
  r.pass = cons[1] <= 1e-6 && trap[1] <= 1e-6 && near_four(r1) && near_four(r2);
  r.detail = "N=2048 drift " + fmt(cons[1]) + " (conserved form), " + fmt(trap[1]) +
             " (nodal form); nodal drift ratios " + fmt(r1) + ", " + fmt(r2);
  return r;
}

CriterionResult stationarity() {
  auto r = titled(3);
  SolverConfig cfg;
  cfg.extract_modulation = false;
  std::vector<GridSpec> ladder;
  for (std::size_t n : {512, 1024, 2048}) ladder.push_back(GridSpec{Spacing::Uniform, n, 50.0, 0.0});
  const auto rep = refinement_study([](const RadialGrid& g) { return harmonic_map(1, g); }, ladder, cfg, 0.1,
                                    [](const EquivariantProfile& q, const RunRecord&, const EquivariantProfile& f) {
                                      return sup_distance(q, f);
                                    });
  if (rep.ratios.size() != 2) {
    r.detail = "refinement incomplete";
    return r;
  }
  r.pass = !rep.inconclusive && near_four(rep.ratios[0]) && near_four(rep.ratios[1]);
  r.detail = "sup deviation " + fmt(rep.errors[0]) + ", " + fmt(rep.errors[1]) + ", " + fmt(rep.errors[2]) +
             "; ratios " + fmt(rep.ratios[0]) + ", " + fmt(rep.ratios[1]);
  return r;
}

CriterionResult resonance() {
  auto r = titled(4);
  std::vector<double> q;
  for (std::size_t n : {2000, 4000, 8000}) {
    const auto g = RadialGrid::uniform(n, 50.0);
    const OperatorH op(g);
    const auto lp = RadialFunction::sample(g, lambda_phi);
    const auto h = apply_H(op, lp);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += g.measure()[i] * h[i] * h[i];
      den += g.measure()[i] * lp[i] * lp[i];
    }
    q.push_back(std::sqrt(num / den));
  }
  const double r1 = q[0] / q[1], r2 = q[1] / q[2];
  r.pass = near_four(r1) && near_four(r2);
  r.detail = "|H(Lphi)|/|Lphi| " + fmt(q[0]) + ", " + fmt(q[1]) + ", " + fmt(q[2]) + "; ratios " + fmt(r1) +
             ", " + fmt(r2);
  return r;
}

CriterionResult radiation_tail(const Artifacts& art) {
  auto r = titled(5);
  const auto t01 = profile_T01(RadialGrid::geometric(4000, 1e4, 8.0));
  const double ratio = t01_tail_ratio(t01, 1e3);
  r.pass = std::abs(ratio - 1.0) <= 0.05;
  r.detail = "T01(1000)/(1000 log 1000 - 1000) = " + std::to_string(ratio);
  if (auto out = art.open("tail_check.dat")) emit_tail_check(*out, t01);
  return r;
}

CriterionResult leading_order() {
  auto r = titled(6);
  const double b0 = 0.01, l0 = 1.0, T = l0 * l0 / b0;
  const ModelParams params{ModVariant::LeadingOrder, 0.1, 0.5};
  ModState s0;
  s0.b = b0;
  s0.lambda = l0;

  const auto fwd = integrate(s0, params, {1e-3 * l0});
  double e_fwd = 0.0;
  for (const auto& x : fwd.samples) e_fwd = std::max(e_fwd, std::abs(x.lambda / ((b0 / l0) * (T - x.t)) - 1.0));

  const auto deep = integrate(s0, params, {1e-8 * l0});
  const auto S = deep.remaining_time();
  const double tail = deep.back().lambda * l0 / b0;
  double e_rem = 0.0;
  for (std::size_t i = 0; i < S.size(); ++i) {
    e_rem = std::max(e_rem, std::abs(deep.samples[i].lambda / ((b0 / l0) * (S[i] + tail)) - 1.0));
  }
  r.pass = fwd.reason == Termination::LambdaFloor && deep.reason == Termination::LambdaFloor && e_fwd <= 1e-8 &&
           e_rem <= 1e-8;
  r.detail = "max rel error " + fmt(e_fwd) + " in t (to 1e-3 lambda0), " + fmt(e_rem) +
             " in T-t (to 1e-8 lambda0)";
  return r;
}

CriterionResult rate_law(const Artifacts& art) {
  auto r = titled(7);
  r.pass = true;
  for (double b0 : {1e-2, 1e-3}) {
    ModState s0;
    s0.b = b0;
    const auto t10 = integrate(s0, {}, {1e-40}, {1e-10});
    const auto t12 = integrate(s0, {}, {1e-40}, {1e-12});
    const auto f10 = fit_blowup_law(t10);
    const auto f12 = fit_blowup_law(t12);
    const double dk = std::abs(f10.kappa / f12.kappa - 1.0);
    r.pass = r.pass && f10.ratio_variation < 0.1 && f12.ratio_variation < 0.1 && dk < 0.05;
    if (!r.detail.empty()) r.detail += "; ";
    r.detail += "b0=" + fmt(b0) + ": variation " + fmt(f10.ratio_variation) + ", kappa " + fmt(f10.kappa) +
                " vs " + fmt(f12.kappa);
    if (auto out = art.open("rate_ratio_b0_" + fmt(b0) + ".dat")) emit_rate_ratio(*out, t12, f12);
  }
  return r;
}

CriterionResult instability() {
  auto r = titled(8);
  const auto zero = instability_probe(0.01, 0.0);
  bool a_zero = true;
  for (const auto& x : zero.trajectory.samples) a_zero = a_zero && x.a == 0.0;
  const auto plus = instability_probe(0.01, 0.1);
  const auto minus = instability_probe(0.01, -0.1);
  bool mirror = plus.trajectory.samples.size() == minus.trajectory.samples.size();
  double dev = 0.0;
  for (std::size_t i = 0; mirror && i < plus.trajectory.samples.size(); ++i) {
    const auto& p = plus.trajectory.samples[i];
    const auto& m = minus.trajectory.samples[i];
    dev = std::max({dev, std::abs(p.a + m.a), std::abs(p.theta + m.theta), std::abs(p.b - m.b),
                    std::abs(p.lambda - m.lambda)});
  }
  mirror = mirror && dev <= 1e-10;
  r.pass = a_zero && plus.monotone && minus.monotone && mirror;
  r.detail = std::string("a=0 stays zero: ") + (a_zero ? "yes" : "no") + "; rho " + fmt(plus.rho.front()) +
             " -> " + fmt(plus.rho.back()) + (plus.monotone ? " monotone" : " not monotone") +
             "; mirror deviation " + fmt(dev);
  return r;
}

CriterionResult round_trips() {
  auto r = titled(10);
  const auto g = RadialGrid::geometric(800, 50.0, 4.0);

  const auto p = perturbed_ground_state(1, g, 5e-2);
  const auto w = frenet_decompose(p, 0.7, 0.3);
  const double frenet = sup_distance(frenet_reconstruct(w.alpha, w.beta, w.gamma, 0.7, 0.3, g), p);

  double ext = 0.0;
  for (double l0 : {0.37, 1.0, 2.2}) {
    for (double th : {-1.1, 0.0, 0.6}) {
      const auto q = harmonic_map(1, g, l0, th);
      const double l = extract_lambda(q);
      ext = std::max({ext, std::abs(l / l0 - 1.0), std::abs(extract_theta(q, l, th) - th)});
    }
  }

  // ODE series resampled at uniform t, then differentiated back
  ModState s0;
  s0.b = 0.05;
  s0.a = 0.005;
  StopCriteria stop;
  stop.s_budget = 12.0;
  IntegratorOptions opt;
  opt.rtol = 1e-12;
  const auto tr = integrate(s0, {}, stop, opt);
  std::vector<double> nodes, l, th, b;
  for (const auto& x : tr.samples) {
    nodes.push_back(1.0 + x.t);
    l.push_back(x.lambda);
    th.push_back(x.theta);
    b.push_back(x.b);
  }
  const auto tg = RadialGrid::from_nodes(nodes);
  const double t_max = 0.9 * tr.back().t;
  std::vector<double> errs;
  for (double dt : {0.2, 0.1, 0.05}) {
    std::vector<double> t, ls, ths, bs;
    for (double x = 0.0; x <= t_max + 1e-12; x += dt) {
      t.push_back(x);
      ls.push_back(interpolate_cubic(tg, l, 1.0 + x));
      ths.push_back(interpolate_cubic(tg, th, 1.0 + x));
      bs.push_back(interpolate_cubic(tg, b, 1.0 + x));
    }
    const auto ser = extract_b_a(t, ls, ths);
    double e = 0.0;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) e = std::max(e, std::abs(ser.samples[i].b - bs[i]));
    errs.push_back(e);
  }
  const double r1 = errs[0] / errs[1], r2 = errs[1] / errs[2];
  r.pass = frenet <= 1e-10 && ext <= 1e-4 && near_four(r1) && near_four(r2);
  r.detail = "frenet " + fmt(frenet) + "; lambda/theta " + fmt(ext) + "; b error ratios " + fmt(r1) + ", " + fmt(r2);
  return r;
}

// d lambda / dt at t0 from a quadratic least-squares fit to (t, lambda) within +-width.
double local_slope(const std::vector<Diagnostic>& d, double t0, double width) {
  double S[5] = {0, 0, 0, 0, 0}, R[3] = {0, 0, 0};
  for (const auto& x : d) {
    const double u = (x.t - t0) / width;
    if (std::abs(u) > 1.0 || !std::isfinite(x.lambda)) continue;
    double pw = 1.0;
    for (int k = 0; k < 5; ++k) {
      S[k] += pw;
      if (k < 3) R[k] += pw * x.lambda;
      pw *= u;
    }
  }
  const auto det = [](const double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  double M[3][3] = {{S[0], S[1], S[2]}, {S[1], S[2], S[3]}, {S[2], S[3], S[4]}};
  double M1[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) M1[i][j] = j == 1 ? R[i] : M[i][j];
  const double D = det(M);
  if (S[0] < 3 || D == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return det(M1) / D / width;
}

constexpr double kCutoff = 4.5;
constexpr double kCeiling = 0.2;
constexpr double kCadence = 0.05;

struct ConcentrationStudy {
  RunRecord run;
  ModSeries series;
  std::size_t start = 0, minimum = 0;
};

ConcentrationStudy concentration_run() {
  BlowupDataSpec spec;
  spec.b0 = 0.1;
  spec.lambda0 = 1.0;
  spec.b_ceiling = kCeiling;
  spec.cutoff = kCutoff;
  spec.grid = GridSpec{Spacing::GeometricStretch, 800, 50.0, 4.0};
  SolverConfig cfg;
  cfg.diagnostic_every = 20;
  cfg.snapshot_interval = kCadence;
  StopSpec stop;
  stop.t_end = 3.5;
  stop.resolution_floor = true;
  ConcentrationStudy c;
  c.run = evolve(build_blowup_data(spec), cfg, stop);
  c.series = snapshot_series(c.run.snapshots);
  const auto& d = c.run.diagnostics;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (std::isfinite(d[i].lambda) && (!std::isfinite(d[c.minimum].lambda) || d[i].lambda < d[c.minimum].lambda)) {
      c.minimum = i;
    }
  }
  c.start = c.minimum;
  while (c.start > 0 && std::isfinite(d[c.start - 1].lambda) && d[c.start - 1].lambda > d[c.start].lambda) --c.start;
  return c;
}

CriterionResult concentration(const ConcentrationStudy& c, const Artifacts& art) {
  auto r = titled(9);
  const auto& d = c.run.diagnostics;
  const double overall = d.front().lambda / d[c.minimum].lambda;
  const double window = d[c.start].lambda / d[c.minimum].lambda;
  const double t0 = d[c.start].t, t1 = d[c.minimum].t;
  bool b_positive = true;
  double worst = 0.0;
  std::size_t used = 0;
  for (const auto& s : c.series.samples) {
    if (s.t < t0 || s.t > t1) continue;
    b_positive = b_positive && s.b > 0.0;
    if (s.one_sided) continue;
    const double lt = local_slope(d, s.t, kCadence);
    worst = std::max(worst, std::abs(s.b + lt * s.lambda) / s.b);
    ++used;
  }
  r.pass = overall >= 2.0 && window >= 2.0 && b_positive && used >= 3 && worst <= 0.2;
  r.detail = "lambda drops by " + fmt(overall) + " (" + fmt(window) + " on the window t in [" + fmt(t0) + ", " +
             fmt(t1) + "]), run ended by " + c.run.termination + "; b > 0: " + (b_positive ? "yes" : "no") +
             "; worst |b + lambda_t lambda|/b " + fmt(worst) + " over " + std::to_string(used) + " samples";
  if (auto out = art.open("concentration_series.csv")) write_mod_series_csv(*out, c.series);
  if (auto out = art.open("concentration_diagnostics.csv")) write_diagnostics_csv(*out, d);
  return r;
}

CriterionResult monitor(const ConcentrationStudy& c, const Artifacts& art) {
  auto r = titled(11);
  const auto& d = c.run.diagnostics;
  const double t0 = d[c.start].t, t1 = d[c.minimum].t;
  std::ostringstream table;
  table.precision(10);
  table << "t,lambda,b,monitor,monitor_corrected\n";
  std::size_t rows = 0;
  bool finite = true;
  double lo = INFINITY, hi = 0.0;
  std::size_t snap = 0;
  for (const auto& s : c.series.samples) {
    while (snap < c.run.snapshots.size() && c.run.snapshots[snap].time() < s.t) ++snap;
    if (s.t < t0 || s.t > t1 || snap >= c.run.snapshots.size()) continue;
    if (!(s.b > 0.0 && s.b < kCeiling)) {
      table << s.t << ',' << s.lambda << ',' << s.b << ",out_of_domain,out_of_domain\n";
      continue;
    }
    const auto w = remainder(c.run.snapshots[snap], s.lambda, s.theta);
    const auto raw = sobolev_diagnostic(w, s.b, kCeiling);
    const auto cor = sobolev_diagnostic(subtract_beta(w, first_order_beta(s.b, kCutoff, w.grid())), s.b, kCeiling);
    table << s.t << ',' << s.lambda << ',' << s.b << ',' << raw.monitor << ',' << cor.monitor << '\n';
    finite = finite && std::isfinite(raw.monitor) && std::isfinite(cor.monitor);
    lo = std::min(lo, raw.monitor);
    hi = std::max(hi, raw.monitor);
    ++rows;
  }
  r.pass = rows > 0 && finite;
  r.detail = std::to_string(rows) + " values, all finite: " + (finite ? "yes" : "no") + "; M in [" + fmt(lo) +
             ", " + fmt(hi) + "]";
  if (auto out = art.open("monitor.csv")) *out << table.str();
  return r;
}



}  // namespace

std::vector<CriterionResult> run_verification(const VerifyOptions& options) {
  const Artifacts art{options.artifact_dir};
  const auto wanted = [&](int id) {
    if (!options.only.empty() && !options.only.count(id)) return false;
    return true;
  };
  const auto slow = [&](int id) { return options.quick && (id == 2 || id == 3 || id == 9 || id == 11); };

  std::optional<ConcentrationStudy> study;
  std::vector<CriterionResult> out;
  for (int id = 1; id <= 11; ++id) {
    if (!wanted(id)) continue;
    CriterionResult r;
    if (slow(id)) {
      r.id = id;
      r.skipped = true;
      r.title = kTitles[id];
    } else {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        switch (id) {
          case 1: r = sphere_constraint(); break;
          case 2: r = energy_conservation(); break;
          case 3: r = stationarity(); break;
          case 4: r = resonance(); break;
          case 5: r = radiation_tail(art); break;
          case 6: r = leading_order(); break;
          case 7: r = rate_law(art); break;
          case 8: r = instability(); break;
          case 9:
          case 11:
            if (!study) study = concentration_run();
            r = id == 9 ? concentration(*study, art) : monitor(*study, art);
            break;
          case 10: r = round_trips(); break;
        }
      } catch (const Error& e) {
        r.id = id;
        r.title = kTitles[id];
        r.pass = false;
        r.detail = std::string("error ") + e.code() + ": " + e.what();
      }
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    if (options.on_result) options.on_result(r);
    out.push_back(r);
  }
  return out;
}

std::string format_result_line(const CriterionResult& r) {
  std::ostringstream s;
  s << (r.skipped ? "SKIP" : r.pass ? "PASS" : "FAIL") << "  " << (r.id < 10 ? " " : "") << r.id << "  "
    << r.title;
  if (r.skipped) {
    s << "  (quick mode)";
  } else {
    s.precision(1);
    s << std::fixed << "  [" << r.seconds << " s]  " << r.detail;
  }
  return s.str();
}

}  // namespace smap
