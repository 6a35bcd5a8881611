#pragma once

// Adaptive integration of the similarity ODE as a first-order system
// (f, f', f'') with an embedded Dormand-Prince 4(5) pair, PI step-size
// control and cubic Hermite dense output between accepted steps.
//
// Trajectories are recorded as a Profile: the accepted samples (with the
// third derivative for interpolation), a log of dead-banded sign-change
// events of f, f' and f'', and how the run terminated.  Forward integration
// only; runaway trajectories stop at the first threshold crossing, located
// by bisection on the dense output.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "simbvp/model.hpp"

namespace simbvp {

enum class Termination { ReachedTmax, BlowUp, StepLimitExceeded, StepUnderflow };

inline const char* termination_name(Termination t) {
  switch (t) {
    case Termination::ReachedTmax: return "reached_tmax";
    case Termination::BlowUp: return "blowup";
    case Termination::StepLimitExceeded: return "step_limit";
    default: return "step_underflow";
  }
}

enum class EventKind { FppSignChange, FpSignChange, FZeroCrossing };

inline const char* event_name(EventKind k) {
  switch (k) {
    case EventKind::FppSignChange: return "fpp_sign_change";
    case EventKind::FpSignChange: return "fp_sign_change";
    default: return "f_zero_crossing";
  }
}

struct ProfileEvent {
  double t = 0.0;
  EventKind kind = EventKind::FppSignChange;
};

struct IvpSpec {
  ModelParams params;
  State initial;
  double t_max = 0.0;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double blowup_threshold = 1e6;
  long max_steps = 500000;
};

/// Horizon used when the caller does not pick one: 50 * max(1, 1/alpha_eff)
/// with alpha_eff = max(|alpha|, 0.1); slowly relaxing tails (small |alpha|)
/// get proportionally more room.
inline double default_t_max(const ModelParams& p) {
  const double alpha_eff = std::max(std::abs(p.alpha), 0.1);
  return 50.0 * std::max(1.0, 1.0 / alpha_eff);
}

inline void validate(const IvpSpec& s) {
  if (!(s.t_max > 0.0)) throw std::invalid_argument("IvpSpec: t_max must be positive");
  if (!(s.rel_tol > 0.0) || s.rel_tol > 1e-2)
    throw std::invalid_argument("IvpSpec: rel_tol outside (0, 1e-2]");
  if (!(s.abs_tol > 0.0) || s.abs_tol > 1e-2)
    throw std::invalid_argument("IvpSpec: abs_tol outside (0, 1e-2]");
  if (!(s.blowup_threshold > 0.0))
    throw std::invalid_argument("IvpSpec: blowup_threshold must be positive");
  if (s.max_steps <= 0) throw std::invalid_argument("IvpSpec: max_steps must be positive");
}

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double dp_c2 = 1.0 / 5, dp_c3 = 3.0 / 10, dp_c4 = 4.0 / 5, dp_c5 = 8.0 / 9;
inline constexpr double dp_a21 = 1.0 / 5;
inline constexpr double dp_a31 = 3.0 / 40, dp_a32 = 9.0 / 40;
inline constexpr double dp_a41 = 44.0 / 45, dp_a42 = -56.0 / 15, dp_a43 = 32.0 / 9;
inline constexpr double dp_a51 = 19372.0 / 6561, dp_a52 = -25360.0 / 2187,
                        dp_a53 = 64448.0 / 6561, dp_a54 = -212.0 / 729;
inline constexpr double dp_a61 = 9017.0 / 3168, dp_a62 = -355.0 / 33, dp_a63 = 46732.0 / 5247,
                        dp_a64 = 49.0 / 176, dp_a65 = -5103.0 / 18656;
inline constexpr double dp_a71 = 35.0 / 384, dp_a73 = 500.0 / 1113, dp_a74 = 125.0 / 192,
                        dp_a75 = -2187.0 / 6784, dp_a76 = 11.0 / 84;
// e = b(5th) - b(4th): weights of the embedded error estimate
inline constexpr double dp_e1 = 71.0 / 57600, dp_e3 = -71.0 / 16695, dp_e4 = 71.0 / 1920,
                        dp_e5 = -17253.0 / 339200, dp_e6 = 22.0 / 525, dp_e7 = -1.0 / 40;

template <int N>
using Vec = std::array<double, N>;

template <int N>
struct DpPoint {
  double t = 0.0;
  Vec<N> y{};
  Vec<N> dy{};
};

/// Cubic Hermite value on [p0.t, p1.t].
template <int N>
inline Vec<N> hermite_eval(const DpPoint<N>& p0, const DpPoint<N>& p1, double t) {
  const double h = p1.t - p0.t;
  if (h == 0.0) return p0.y;
  const double th = (t - p0.t) / h;
  const double th2 = th * th;
  const double om = 1.0 - th;
  const double h00 = (1.0 + 2.0 * th) * om * om;
  const double h10 = th * om * om;
  const double h01 = th2 * (3.0 - 2.0 * th);
  const double h11 = th2 * (th - 1.0);
  Vec<N> y;
  for (int i = 0; i < N; ++i)
    y[i] = h00 * p0.y[i] + h10 * h * p0.dy[i] + h01 * p1.y[i] + h11 * h * p1.dy[i];
  return y;
}

enum class StopReason { ReachedEnd, StoppedByCallback, StepLimit, StepUnderflow };

/// Drive the DP 4(5) pair from (t0, y0) to t_end (either direction).
/// on_step(prev, next) is called once per accepted step and may return false
/// to end the run.  Underflow is declared when |h| < 1e-13 * max(1, |t|).
template <int N, class RHS, class OnStep>
StopReason dp45_drive(RHS&& rhs, Vec<N> y0, double t0, double t_end, double rel_tol,
                      double abs_tol, long max_steps, OnStep&& on_step) {
  const double dir = (t_end >= t0) ? 1.0 : -1.0;
  const double span = std::abs(t_end - t0);
  if (span == 0.0) return StopReason::ReachedEnd;

  Vec<N> y = y0, k1{};
  rhs(t0, y, k1);
  double t = t0;

  // starting step (Hairer's heuristic)
  double h;
  {
    double d0 = 0.0, d1 = 0.0;
    for (int i = 0; i < N; ++i) {
      const double sc = abs_tol + rel_tol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    double h0 = (d0 < 1e-10 || d1 < 1e-10) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    Vec<N> y1, f1;
    for (int i = 0; i < N; ++i) y1[i] = y[i] + dir * h0 * k1[i];
    rhs(t + dir * h0, y1, f1);
    double d2 = 0.0;
    for (int i = 0; i < N; ++i) {
      const double sc = abs_tol + rel_tol * std::abs(y[i]);
      d2 += ((f1[i] - k1[i]) / sc) * ((f1[i] - k1[i]) / sc);
    }
    d2 = std::sqrt(d2 / N) / h0;
    const double dm = std::max(d1, d2);
    double h1 = (dm <= 1e-15) ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min({100.0 * h0, h1, span});
    if (!(h > 0.0) || !std::isfinite(h)) h = 1e-6;
  }

  // cap the step so the Hermite dense output keeps usable resolution on
  // flat stretches (event location quality, quadrature over samples)
  const double h_max = span / 16.0;
  h = std::min(h, h_max);

  // PI controller state
  const double safe = 0.9, beta = 0.04;
  const double expo1 = 0.2 - beta * 0.75;
  const double facc1 = 5.0, facc2 = 0.1;  // max grow 5x, max shrink 10x
  double facold = 1e-4;
  bool last_rejected = false;

  Vec<N> k2, k3, k4, k5, k6, k7, ytmp, ynew;
  for (long step = 0; step < max_steps; ++step) {
    if (h < 1e-13 * std::max(1.0, std::abs(t))) return StopReason::StepUnderflow;
    bool last_step = false;
    if (h >= std::abs(t_end - t)) {
      h = std::abs(t_end - t);
      last_step = true;
    }
    const double hs = dir * h;

    for (int i = 0; i < N; ++i) ytmp[i] = y[i] + hs * dp_a21 * k1[i];
    rhs(t + dp_c2 * hs, ytmp, k2);
    for (int i = 0; i < N; ++i) ytmp[i] = y[i] + hs * (dp_a31 * k1[i] + dp_a32 * k2[i]);
    rhs(t + dp_c3 * hs, ytmp, k3);
    for (int i = 0; i < N; ++i)
      ytmp[i] = y[i] + hs * (dp_a41 * k1[i] + dp_a42 * k2[i] + dp_a43 * k3[i]);
    rhs(t + dp_c4 * hs, ytmp, k4);
    for (int i = 0; i < N; ++i)
      ytmp[i] = y[i] + hs * (dp_a51 * k1[i] + dp_a52 * k2[i] + dp_a53 * k3[i] + dp_a54 * k4[i]);
    rhs(t + dp_c5 * hs, ytmp, k5);
    for (int i = 0; i < N; ++i)
      ytmp[i] = y[i] + hs * (dp_a61 * k1[i] + dp_a62 * k2[i] + dp_a63 * k3[i] + dp_a64 * k4[i] +
                             dp_a65 * k5[i]);
    rhs(t + hs, ytmp, k6);
    for (int i = 0; i < N; ++i)
      ynew[i] = y[i] + hs * (dp_a71 * k1[i] + dp_a73 * k3[i] + dp_a74 * k4[i] + dp_a75 * k5[i] +
                             dp_a76 * k6[i]);
    rhs(t + hs, ynew, k7);  // FSAL

    double err = 0.0;
    for (int i = 0; i < N; ++i) {
      const double ei = hs * (dp_e1 * k1[i] + dp_e3 * k3[i] + dp_e4 * k4[i] + dp_e5 * k5[i] +
                              dp_e6 * k6[i] + dp_e7 * k7[i]);
      const double sc = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / N);

    if (!std::isfinite(err)) {  // overflow inside the step: retry much smaller
      h *= 0.1;
      last_rejected = true;
      continue;
    }

    const double fac11 = std::pow(err, expo1);
    if (err <= 1.0) {
      // accept
      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(facc2, std::min(facc1, fac / safe));
      double hnew = h / fac;
      if (last_rejected) hnew = std::min(hnew, h);
      facold = std::max(err, 1e-4);
      last_rejected = false;

      DpPoint<N> p0{t, y, k1}, p1{t + hs, ynew, k7};
      t += hs;
      y = ynew;
      k1 = k7;
      if (!on_step(p0, p1)) return StopReason::StoppedByCallback;
      if (last_step || std::abs(t_end - t) < 1e-14 * std::max(1.0, std::abs(t_end)))
        return StopReason::ReachedEnd;
      h = std::min(hnew, h_max);
    } else {
      h = h / std::min(facc1, fac11 / safe);
      last_rejected = true;
    }
  }
  return StopReason::StepLimit;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Profile
// ---------------------------------------------------------------------------

struct Sample {
  double t = 0.0;
  State y;
  double fppp = 0.0;  // derivative of fpp, kept for dense output
};

struct Profile {
  std::vector<Sample> samples;
  std::vector<ProfileEvent> events;
  Termination termination = Termination::ReachedTmax;
  double blowup_time = 0.0;  // meaningful iff termination == BlowUp

  bool empty() const { return samples.empty(); }
  const Sample& front() const { return samples.front(); }
  const Sample& back() const { return samples.back(); }
  double t_end() const { return samples.empty() ? 0.0 : samples.back().t; }

  /// Dense evaluation (cubic Hermite between samples, clamped at the ends).
  State at(double t) const {
    if (samples.empty()) throw std::logic_error("Profile::at on empty profile");
    if (t <= samples.front().t) return samples.front().y;
    if (t >= samples.back().t) return samples.back().y;
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](double v, const Sample& s) { return v < s.t; });
    const Sample& s1 = *it;
    const Sample& s0 = *(it - 1);
    detail::DpPoint<3> p0{s0.t, {s0.y.f, s0.y.fp, s0.y.fpp}, {s0.y.fp, s0.y.fpp, s0.fppp}};
    detail::DpPoint<3> p1{s1.t, {s1.y.f, s1.y.fp, s1.y.fpp}, {s1.y.fp, s1.y.fpp, s1.fppp}};
    auto v = detail::hermite_eval(p0, p1, t);
    return State{v[0], v[1], v[2]};
  }

  /// Synthetic profile from explicit derivatives on a fixed grid; runs the
  /// same event scan as the integrator.
  template <class F0, class F1, class F2, class F3>
  static Profile from_function(F0&& f, F1&& fp, F2&& fpp, F3&& fppp,
                               const std::vector<double>& ts);
};

namespace detail {

inline constexpr double kSignDeadBand = 1e-12;
inline constexpr double kEventTimeTol = 1e-8;

inline int definite_sign(double v) {
  if (v > kSignDeadBand) return 1;
  if (v < -kSignDeadBand) return -1;
  return 0;
}

inline double component(const State& y, EventKind k) {
  switch (k) {
    case EventKind::FppSignChange: return y.fpp;
    case EventKind::FpSignChange: return y.fp;
    default: return y.f;
  }
}

/// Bisect the dense output of `prof` for a zero of the event channel between
/// t_lo (sign s_lo) and t_hi (opposite definite sign), to kEventTimeTol.
inline double locate_crossing(const Profile& prof, EventKind k, double t_lo, double t_hi,
                              int s_lo) {
  double lo = t_lo, hi = t_hi;
  while (hi - lo > kEventTimeTol) {
    const double mid = 0.5 * (lo + hi);
    const double v = component(prof.at(mid), k);
    const int s = (v > 0.0) ? 1 : (v < 0.0 ? -1 : 0);
    if (s == 0) return mid;
    if (s == s_lo)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct SignTracker {
  EventKind kind;
  int last_sign = 0;
  double last_def_t = 0.0;

  void seed(const State& y, double t) {
    last_sign = definite_sign(component(y, kind));
    last_def_t = t;
  }
  /// Returns true (and updates) when a definite sign flip happened.
  bool advance(const State& y, double t, double* t_from, int* s_from) {
    const int s = definite_sign(component(y, kind));
    if (s == 0) return false;
    const bool flipped = (last_sign != 0 && s != last_sign);
    *t_from = last_def_t;
    *s_from = last_sign;
    last_sign = s;
    last_def_t = t;
    return flipped;
  }
};

inline void scan_events(Profile& prof, std::array<SignTracker, 3>& trackers, std::size_t from) {
  for (std::size_t i = std::max<std::size_t>(from, 1); i < prof.samples.size(); ++i) {
    const Sample& s = prof.samples[i];
    for (auto& tr : trackers) {
      double t0;
      int s0;
      if (tr.advance(s.y, s.t, &t0, &s0))
        prof.events.push_back({locate_crossing(prof, tr.kind, t0, s.t, s0), tr.kind});
    }
  }
  std::sort(prof.events.begin(), prof.events.end(),
            [](const ProfileEvent& a, const ProfileEvent& b) { return a.t < b.t; });
}

}  // namespace detail

template <class F0, class F1, class F2, class F3>
Profile Profile::from_function(F0&& f, F1&& fp, F2&& fpp, F3&& fppp,
                               const std::vector<double>& ts) {
  if (ts.size() < 2) throw std::invalid_argument("from_function: need at least two abscissae");
  Profile prof;
  prof.samples.reserve(ts.size());
  for (double t : ts)
    prof.samples.push_back({t, State{f(t), fp(t), fpp(t)}, fppp(t)});
  for (std::size_t i = 1; i < prof.samples.size(); ++i)
    if (!(prof.samples[i].t > prof.samples[i - 1].t))
      throw std::invalid_argument("from_function: abscissae must increase strictly");
  std::array<detail::SignTracker, 3> trackers{
      detail::SignTracker{EventKind::FppSignChange},
      detail::SignTracker{EventKind::FpSignChange},
      detail::SignTracker{EventKind::FZeroCrossing}};
  for (auto& tr : trackers) tr.seed(prof.samples.front().y, prof.samples.front().t);
  detail::scan_events(prof, trackers, 1);
  prof.termination = Termination::ReachedTmax;
  return prof;
}

// ---------------------------------------------------------------------------
// integrate
// ---------------------------------------------------------------------------

inline Profile integrate(const IvpSpec& spec) {
  validate(spec);
  Profile prof;
  prof.samples.push_back(
      {0.0, spec.initial, rhs(spec.params, spec.initial)});

  std::array<detail::SignTracker, 3> trackers{
      detail::SignTracker{EventKind::FppSignChange},
      detail::SignTracker{EventKind::FpSignChange},
      detail::SignTracker{EventKind::FZeroCrossing}};
  for (auto& tr : trackers) tr.seed(spec.initial, 0.0);

  const double thr = spec.blowup_threshold;
  bool blew_up = false;

  auto sys = [&spec](double, const detail::Vec<3>& y, detail::Vec<3>& dy) {
    const State s{y[0], y[1], y[2]};
    dy[0] = s.fp;
    dy[1] = s.fpp;
    dy[2] = rhs(spec.params, s);
  };

  auto on_step = [&](const detail::DpPoint<3>& p0, const detail::DpPoint<3>& p1) -> bool {
    const double mx = std::max({std::abs(p1.y[0]), std::abs(p1.y[1]), std::abs(p1.y[2])});
    if (mx > thr) {
      // first threshold crossing inside [p0.t, p1.t], to 1e-8 in t
      double lo = p0.t, hi = p1.t;
      while (hi - lo > detail::kEventTimeTol) {
        const double mid = 0.5 * (lo + hi);
        const auto ym = detail::hermite_eval(p0, p1, mid);
        const double m = std::max({std::abs(ym[0]), std::abs(ym[1]), std::abs(ym[2])});
        if (m > thr)
          hi = mid;
        else
          lo = mid;
      }
      const double tb = 0.5 * (lo + hi);
      const auto yb = detail::hermite_eval(p0, p1, tb);
      const State sb{yb[0], yb[1], yb[2]};
      prof.samples.push_back({tb, sb, rhs(spec.params, sb)});
      detail::scan_events(prof, trackers, prof.samples.size() - 1);
      prof.termination = Termination::BlowUp;
      prof.blowup_time = tb;
      blew_up = true;
      return false;
    }
    prof.samples.push_back({p1.t, State{p1.y[0], p1.y[1], p1.y[2]}, p1.dy[2]});
    detail::scan_events(prof, trackers, prof.samples.size() - 1);
    return true;
  };

  const auto reason = detail::dp45_drive<3>(
      sys, {spec.initial.f, spec.initial.fp, spec.initial.fpp}, 0.0, spec.t_max, spec.rel_tol,
      spec.abs_tol, spec.max_steps, on_step);

  if (blew_up)
    prof.termination = Termination::BlowUp;
  else if (reason == detail::StopReason::ReachedEnd)
    prof.termination = Termination::ReachedTmax;
  else if (reason == detail::StopReason::StepLimit)
    prof.termination = Termination::StepLimitExceeded;
  else if (reason == detail::StopReason::StepUnderflow)
    prof.termination = Termination::StepUnderflow;
  return prof;
}

/// Group action t -> (k f(k t), k^2 f'(k t), k^3 f''(k t)) on a stored
/// trajectory; solutions of the ODE map to solutions with the same
/// (alpha, beta).  Resamples in place: sample i moves to t_i / k.
inline Profile scale_solution(const Profile& in, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("scale_solution: kappa must be positive");
  Profile out;
  out.samples.reserve(in.samples.size());
  const double k2 = kappa * kappa, k3 = k2 * kappa, k4 = k3 * kappa;
  for (const Sample& s : in.samples)
    out.samples.push_back({s.t / kappa,
                           State{kappa * s.y.f, k2 * s.y.fp, k3 * s.y.fpp},
                           k4 * s.fppp});
  out.events.reserve(in.events.size());
  for (const ProfileEvent& e : in.events) out.events.push_back({e.t / kappa, e.kind});
  out.termination = in.termination;
  out.blowup_time = in.blowup_time / kappa;
  return out;
}

}  // namespace simbvp
