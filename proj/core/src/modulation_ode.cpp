#include "smap/modulation_ode.hpp"

#include <algorithm>
#include <array>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <iomanip>
#include <optional>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "smap/errors.hpp"

namespace smap {

std::string to_string(ModVariant v) {
  return v == ModVariant::LeadingOrder ? "leading" : "log";
}

ModVariant mod_variant_from_string(const std::string& name) {
  if (name == "leading" || name == "leading-order") return ModVariant::LeadingOrder;
  if (name == "log" || name == "log-corrected") return ModVariant::LogCorrected;
  throw ConfigError("unknown ODE variant '" + name + "' (expected leading|log)");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::LambdaFloor: return "lambda_floor";
    case Termination::BCrossedZero: return "b_crossed_zero";
    case Termination::SBudget: return "s_budget";
  }
  return "unknown";
}

namespace {

// Integration variables.
enum : std::size_t { MU, B, A, THETA, TAU, DIM };
using Vec = std::array<double, DIM>;

bool log_domain_ok(double b, const ModelParams& p) { return b > 0.0 && b < p.b_ceiling; }

// Returns false when a log-corrected stage leaves the domain of |log b|.
bool rhs(const Vec& y, const ModelParams& p, Vec& dy) {
  const double b = y[B];
  const double a = y[A];
  dy[MU] = -b;
  dy[THETA] = -a;
  dy[TAU] = std::exp(2.0 * y[MU]);
  if (p.variant == ModVariant::LeadingOrder) {
    dy[B] = -b * b - a * a;
    dy[A] = 0.0;
    return true;
  }
  if (!log_domain_ok(b, p)) return false;
  const double L = -std::log(b);
  dy[B] = -b * b - p.log_coefficient * b * b / L - a * a;
  dy[A] = -2.0 * a * b / L;
  return true;
}

// Dormand-Prince 5(4).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

struct StepResult {
  bool ok = false;
  Vec y1{};
  Vec k7{};
  double err = 0.0;
  std::array<Vec, 5> cont{};
};

Vec combo(const Vec& y, double h, std::initializer_list<std::pair<double, const Vec*>> terms) {
  Vec out = y;
  for (std::size_t i = 0; i < DIM; ++i) {
    double acc = 0.0;
    for (const auto& [c, k] : terms) acc += c * (*k)[i];
    out[i] += h * acc;
  }
  return out;
}

StepResult dopri_step(const Vec& y0, const Vec& k1, double h, const ModelParams& p, double rtol) {
  StepResult r;
  Vec k2, k3, k4, k5, k6, k7;
  if (!rhs(combo(y0, h, {{a21, &k1}}), p, k2)) return r;
  if (!rhs(combo(y0, h, {{a31, &k1}, {a32, &k2}}), p, k3)) return r;
  if (!rhs(combo(y0, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}), p, k4)) return r;
  if (!rhs(combo(y0, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}), p, k5)) return r;
  if (!rhs(combo(y0, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}), p, k6)) return r;
  const Vec y1 = combo(y0, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
  if (!rhs(y1, p, k7)) return r;
  if (!(y1[TAU] > 0.0)) return r;

  // Mixed scales: relative in lambda through log lambda, relative to the
  // size of (b, a) for the speeds, relative in the step's time increment.
  const double ba = std::max(std::abs(y0[B]) + std::abs(y0[A]), std::abs(y1[B]) + std::abs(y1[A]));
  const Vec sc{rtol, rtol * ba, rtol * ba, rtol * std::max(1.0, std::max(std::abs(y0[THETA]), std::abs(y1[THETA]))),
               rtol * y1[TAU]};
  double acc = 0.0;
  for (std::size_t i = 0; i < DIM; ++i) {
    const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    if (e == 0.0) continue;
    const double q = sc[i] > 0.0 ? e / sc[i] : std::numeric_limits<double>::infinity();
    acc += q * q;
  }
  r.err = std::sqrt(acc / static_cast<double>(DIM));
  r.ok = std::isfinite(r.err);
  r.y1 = y1;
  r.k7 = k7;
  for (std::size_t i = 0; i < DIM; ++i) {
    const double diff = y1[i] - y0[i];
    const double bspl = h * k1[i] - diff;
    r.cont[0][i] = y0[i];
    r.cont[1][i] = diff;
    r.cont[2][i] = bspl;
    r.cont[3][i] = diff - h * k7[i] - bspl;
    r.cont[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
  }
  return r;
}

Vec dense(const StepResult& r, double th) {
  Vec out;
  const double th1 = 1.0 - th;
  for (std::size_t i = 0; i < DIM; ++i) {
    const auto& c = r.cont;
    out[i] = c[0][i] + th * (c[1][i] + th1 * (c[2][i] + th * (c[3][i] + th1 * c[4][i])));
  }
  return out;
}

std::string dump(const Vec& y, double s, double h) {
  std::ostringstream out;
  out << std::setprecision(17) << "s=" << s << " h=" << h << " lambda=" << std::exp(y[MU]) << " b=" << y[B]
      << " a=" << y[A] << " theta=" << y[THETA];
  return out.str();
}

void validate_state(const ModState& st, const ModelParams& p) {
  if (!(p.b_ceiling > 0.0 && p.b_ceiling < 1.0)) throw DomainError("b_ceiling must lie in (0, 1)");
  if (!std::isfinite(p.log_coefficient)) throw DomainError("log_coefficient must be finite");
  if (!(st.lambda > 0.0) || !std::isfinite(st.lambda)) throw DomainError("lambda must be positive and finite");
  if (!std::isfinite(st.a) || !std::isfinite(st.theta) || !std::isfinite(st.s) || !std::isfinite(st.t)) {
    throw DomainError("modulation state must be finite");
  }
  if (!(st.b > 0.0 && st.b < p.b_ceiling)) {
    std::ostringstream msg;
    msg << "b = " << st.b << " outside the blow-up branch (0, " << p.b_ceiling << ")";
    throw DomainError(msg.str());
  }
}

}  // namespace

ModDerivative mod_rhs(const ModState& state, const ModelParams& params) {
  if (params.variant == ModVariant::LogCorrected && !log_domain_ok(state.b, params)) {
    std::ostringstream msg;
    msg << "log-corrected law needs 0 < b < " << params.b_ceiling << ", got b = " << state.b;
    throw DomainError(msg.str());
  }
  Vec y{std::log(state.lambda), state.b, state.a, state.theta, 0.0};
  Vec dy;
  rhs(y, params, dy);
  return {dy[B], dy[A], dy[MU] * state.lambda, dy[THETA], state.lambda * state.lambda};
}

std::vector<double> ModTrajectory::remaining_time() const {
  std::vector<double> out(samples.size(), 0.0);
  for (std::size_t n = increments.size(); n-- > 0;) out[n] = out[n + 1] + increments[n];
  return out;
}

ModTrajectory integrate(const ModState& state0, const ModelParams& params, const StopCriteria& stop,
                        const IntegratorOptions& options) {
  validate_state(state0, params);
  if (!(stop.lambda_floor > 0.0)) throw DomainError("lambda_floor must be positive");
  if (!(stop.lambda_floor < state0.lambda)) throw DomainError("lambda_floor must lie below lambda0");
  if (!(stop.s_budget > 0.0)) throw DomainError("s_budget must be positive");
  if (!(options.rtol > 0.0 && options.rtol < 1e-2)) throw DomainError("rtol must lie in (0, 1e-2)");
  if (!(options.initial_step > 0.0)) throw DomainError("initial_step must be positive");

  ModTrajectory traj;
  traj.params = params;
  traj.samples.push_back(state0);

  const double log_floor = std::log(stop.lambda_floor);
  const double b_threshold = params.variant == ModVariant::LogCorrected ? 1e-6 : 0.0;
  const double s_end = state0.s + stop.s_budget;
  auto g_floor = [&](const Vec& y) { return y[MU] - log_floor; };
  auto g_b = [&](const Vec& y) { return y[B] - b_threshold * std::abs(y[A]); };

  Vec y{std::log(state0.lambda), state0.b, state0.a, state0.theta, 0.0};
  double s = state0.s;
  double t = state0.t;
  double h = options.initial_step;
  Vec k1;
  rhs(y, params, k1);

  for (std::size_t step = 0;; ++step) {
    if (step >= options.max_steps) throw StiffnessError("step budget exhausted: " + dump(y, s, h));
    bool last_by_budget = false;
    if (std::isfinite(s_end) && s + h >= s_end) {
      h = s_end - s;
      last_by_budget = true;
    }
    if (h <= 1e-14 * std::max(1.0, std::abs(s))) throw StiffnessError("step size underflow: " + dump(y, s, h));

    y[TAU] = 0.0;
    StepResult r = dopri_step(y, k1, h, params, options.rtol);
    if (!r.ok || r.err > 1.0) {
      const double fac = r.ok ? std::max(0.2, 0.9 * std::pow(r.err, -0.2)) : 0.25;
      h *= fac;
      continue;
    }

    std::optional<Termination> event;
    double th_event = 1.0;
    const auto locate = [&](auto&& g, Termination kind) {
      if (!(g(r.y1) <= 0.0)) return;
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(dense(r, mid)) <= 0.0 ? hi : lo) = mid;
      }
      if (hi < th_event || !event) {
        th_event = hi;
        event = kind;
      }
    };
    locate(g_floor, Termination::LambdaFloor);
    locate(g_b, Termination::BCrossedZero);

    double h_taken = h;
    if (event) {
      if (th_event < 1.0) {
        h_taken = th_event * h;
        StepResult redo = dopri_step(y, k1, h_taken, params, options.rtol);
        if (redo.ok) r = redo;
        else h_taken = h;
      }
    }

    y = r.y1;
    k1 = r.k7;
    s += h_taken;
    t += y[TAU];
    traj.increments.push_back(y[TAU]);
    traj.samples.push_back(ModState{std::exp(y[MU]), y[B], y[THETA], y[A], s, t});

    if (event) {
      traj.reason = *event;
      return traj;
    }
    if (last_by_budget) {
      traj.reason = Termination::SBudget;
      return traj;
    }
    const double fac = r.err > 0.0 ? std::clamp(0.9 * std::pow(r.err, -0.2), 0.2, 5.0) : 5.0;
    h *= fac;
  }
}

namespace {

struct WindowFit {
  double kappa = 0.0;
  double residual = 0.0;
  double sum_sq = 0.0;
};

// Best kappa for a fixed remaining time D over samples [first, end).
WindowFit fit_kappa(const ModTrajectory& traj, const std::vector<double>& S, std::size_t first, double D) {
  double sp = 0.0, spp = 0.0;
  const std::size_t n = traj.samples.size();
  for (std::size_t i = first; i < n; ++i) {
    const double tau = D + S[i];
    const double L = std::log(tau);
    const double p = traj.samples[i].lambda * L * L / tau;
    sp += p;
    spp += p * p;
  }
  WindowFit out;
  const double x = sp / spp;
  out.kappa = 1.0 / x;
  for (std::size_t i = first; i < n; ++i) {
    const double tau = D + S[i];
    const double L = std::log(tau);
    const double dev = x * traj.samples[i].lambda * L * L / tau - 1.0;
    out.sum_sq += dev * dev;
    out.residual = std::max(out.residual, std::abs(dev));
  }
  return out;
}

std::size_t window_start(const std::vector<double>& S, double D, double decades) {
  const double upper = D * std::pow(10.0, decades);
  std::size_t first = S.size() - 1;
  while (first > 0 && D + S[first - 1] <= upper) --first;
  return first;
}

}  // namespace

FitResult fit_blowup_law(const ModTrajectory& traj, const FitOptions& options) {
  if (traj.reason != Termination::LambdaFloor) {
    throw FitWindowError("fit needs a trajectory that reached the lambda floor, got " + to_string(traj.reason));
  }
  if (traj.samples.size() < 8) throw FitWindowError("trajectory too short to fit");
  const auto S = traj.remaining_time();
  const ModState& end = traj.back();
  // Leading-order remaining time from the last sample: lambda^2 / b.
  double D = end.lambda * end.lambda / std::max(end.b, std::numeric_limits<double>::min());
  if (!(D + S.front() >= D * std::pow(10.0, options.decades))) {
    throw FitWindowError("trajectory spans less than the requested decades of T - t");
  }

  std::size_t first = 0;
  for (int pass = 0; pass < 2; ++pass) {
    first = window_start(S, D, options.decades);
    if (traj.samples.size() - first < 5) throw FitWindowError("fewer than five samples in the fit window");
    const double logD0 = std::log(D);
    auto objective = [&](double logD) { return fit_kappa(traj, S, first, std::exp(logD)).sum_sq; };
    const auto best = boost::math::tools::brent_find_minima(objective, logD0 - 6.0, logD0 + 6.0, 52);
    D = std::exp(best.first);
  }
  first = window_start(S, D, options.decades);
  if (traj.samples.size() - first < 5) throw FitWindowError("fewer than five samples in the fit window");
  if (D + S.front() < D * std::pow(10.0, options.decades)) {
    throw FitWindowError("fitted blow-up time leaves less than the requested decades");
  }
  const WindowFit wf = fit_kappa(traj, S, first, D);

  FitResult out;
  out.remaining = D;
  out.T = end.t + D;
  out.kappa = wf.kappa;
  out.residual = wf.residual;
  out.window_size = traj.samples.size() - first;
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  for (std::size_t i = first; i < traj.samples.size(); ++i) {
    const double tau = D + S[i];
    const double L = std::log(tau);
    const double ratio = traj.samples[i].lambda * L * L / tau;
    rmin = std::min(rmin, ratio);
    rmax = std::max(rmax, ratio);
  }
  out.ratio_variation = rmax / rmin - 1.0;
  if (!(out.kappa > 0.0) || !(out.remaining > 0.0)) throw FitWindowError("fit produced a non-positive parameter");
  return out;
}

FitResult fit_linear_law(const ModTrajectory& traj) {
  if (traj.samples.size() < 3) throw FitWindowError("trajectory too short to fit");
  const auto S = traj.remaining_time();
  // lambda_i ~ c S_i + e with e = c D; rows scaled by 1/lambda_i.
  double m11 = 0, m12 = 0, m22 = 0, r1 = 0, r2 = 0;
  for (std::size_t i = 0; i < S.size(); ++i) {
    const double w = 1.0 / traj.samples[i].lambda;
    const double x1 = S[i] * w;
    const double x2 = w;
    m11 += x1 * x1;
    m12 += x1 * x2;
    m22 += x2 * x2;
    r1 += x1;
    r2 += x2;
  }
  const double det = m11 * m22 - m12 * m12;
  if (!(std::abs(det) > 0.0)) throw FitWindowError("degenerate linear fit");
  const double c = (r1 * m22 - r2 * m12) / det;
  const double e = (m11 * r2 - m12 * r1) / det;
  FitResult out;
  out.kappa = c;
  out.remaining = e / c;
  out.T = traj.back().t + out.remaining;
  out.window_size = S.size();
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  for (std::size_t i = 0; i < S.size(); ++i) {
    const double model = c * S[i] + e;
    const double lam = traj.samples[i].lambda;
    out.residual = std::max(out.residual, std::abs(model / lam - 1.0));
    const double ratio = lam / (out.remaining + S[i]);
    rmin = std::min(rmin, ratio);
    rmax = std::max(rmax, ratio);
  }
  out.ratio_variation = rmax / rmin - 1.0;
  return out;
}

GrowthReport instability_probe(double b0, double epsilon, const ModelParams& params, const StopCriteria& stop,
                               const IntegratorOptions& options) {
  if (!(std::abs(epsilon) <= 1.0)) throw DomainError("instability probe needs |epsilon| <= 1");
  ModelParams p = params;
  p.variant = ModVariant::LogCorrected;
  if (!log_domain_ok(b0, p)) throw DomainError("instability probe needs 0 < b0 < b_ceiling");
  ModState st;
  st.b = b0;
  st.a = epsilon * b0 / -std::log(b0);
  GrowthReport rep;
  rep.trajectory = integrate(st, p, stop, options);
  rep.rho.reserve(rep.trajectory.samples.size());
  for (const auto& x : rep.trajectory.samples) {
    const double L = x.b > 0.0 ? -std::log(x.b) : std::numeric_limits<double>::infinity();
    rep.rho.push_back(x.a * L / x.b);
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.rho.size(); ++i) {
    const double prev = rep.rho[i - 1];
    const double cur = rep.rho[i];
    const bool ok = epsilon > 0.0 ? cur > prev : epsilon < 0.0 ? cur < prev : (cur == 0.0 && prev == 0.0);
    if (!ok) {
      rep.monotone = false;
      break;
    }
  }
  return rep;
}

void write_trajectory_csv(std::ostream& out, const ModTrajectory& traj) {
  out << "s,t,lambda,b,theta,a\n" << std::setprecision(17);
  for (const auto& x : traj.samples) {
    out << x.s << ',' << x.t << ',' << x.lambda << ',' << x.b << ',' << x.theta << ',' << x.a << '\n';
  }
}

std::string fit_result_json(const FitResult& fit) {
  nlohmann::json j;
  j["T"] = fit.T;
  j["remaining"] = fit.remaining;
  j["kappa"] = fit.kappa;
  j["residual"] = fit.residual;
  j["ratio_variation"] = fit.ratio_variation;
  j["window_size"] = fit.window_size;
  return j.dump(2);
}

}  // namespace smap
