#pragma once

// Phase-plane reduction.  On any interval where f keeps one sign, the
// rescaled variables
//
//     u = f'/f^2,   v = f''/f^3,   s(t) = integral of f from tau to t
//
// turn the third-order equation into the planar autonomous system
//
//     du/ds = v - 2 u^2
//     dv/ds = -alpha v + beta u^2 - 3 u v
//
// valid for every (alpha, beta).  Besides the origin (always degenerate:
// eigenvalues {0, -alpha}) the field has one further fixed point
// u* = (beta - 2 alpha)/6, v* = 2 u*^2 whenever beta != 2 alpha; its type
// follows from the 2x2 Jacobian eigenvalues.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "simbvp/integrate.hpp"

namespace simbvp {

struct PhaseState {
  double s = 0.0;
  double u = 0.0;
  double v = 0.0;
};

/// (du/ds, dv/ds) of the planar field.
inline std::pair<double, double> phase_rhs(double alpha, double beta, double u, double v) {
  return {v - 2.0 * u * u, -alpha * v + beta * u * u - 3.0 * u * v};
}

/// Pointwise map (f, f', f'') -> (u, v); requires f != 0.
inline std::pair<double, double> to_phase_point(const State& y) {
  const double f2 = y.f * y.f;
  return {y.fp / f2, y.fpp / (f2 * y.f)};
}

/// Thrown when a zero of f makes the requested transform meaningless.
class FVanishesError : public std::runtime_error {
 public:
  explicit FVanishesError(double t)
      : std::runtime_error("f vanishes at t = " + std::to_string(t)), t_(t) {}
  double where() const { return t_; }

 private:
  double t_;
};

// ---------------------------------------------------------------------------
// fixed points
// ---------------------------------------------------------------------------

enum class FixedPointType {
  Saddle,
  StableNode,
  UnstableNode,
  StableFocus,
  UnstableFocus,
  Center,
  Degenerate
};

inline const char* fixed_point_type_name(FixedPointType t) {
  switch (t) {
    case FixedPointType::Saddle: return "saddle";
    case FixedPointType::StableNode: return "stable_node";
    case FixedPointType::UnstableNode: return "unstable_node";
    case FixedPointType::StableFocus: return "stable_focus";
    case FixedPointType::UnstableFocus: return "unstable_focus";
    case FixedPointType::Center: return "center";
    default: return "degenerate";
  }
}

struct FixedPointInfo {
  double u = 0.0, v = 0.0;
  double jacobian[2][2] = {{0, 0}, {0, 0}};
  std::complex<double> eigenvalues[2];
  FixedPointType type = FixedPointType::Degenerate;
};

namespace detail {

inline FixedPointInfo classify_fixed_point(double alpha, double beta, double u, double v) {
  FixedPointInfo fp;
  fp.u = u;
  fp.v = v;
  fp.jacobian[0][0] = -4.0 * u;
  fp.jacobian[0][1] = 1.0;
  fp.jacobian[1][0] = 2.0 * beta * u - 3.0 * v;
  fp.jacobian[1][1] = -alpha - 3.0 * u;

  const double tr = fp.jacobian[0][0] + fp.jacobian[1][1];
  const double det = fp.jacobian[0][0] * fp.jacobian[1][1] - fp.jacobian[0][1] * fp.jacobian[1][0];
  const double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) {
    const double rt = std::sqrt(disc);
    fp.eigenvalues[0] = 0.5 * (tr - rt);
    fp.eigenvalues[1] = 0.5 * (tr + rt);
  } else {
    const double im = 0.5 * std::sqrt(-disc);
    fp.eigenvalues[0] = {0.5 * tr, -im};
    fp.eigenvalues[1] = {0.5 * tr, im};
  }

  constexpr double eps = 1e-10;
  const auto l0 = fp.eigenvalues[0];
  const auto l1 = fp.eigenvalues[1];
  if (l0.imag() != 0.0) {
    const double re = l0.real();
    fp.type = (std::abs(re) < eps) ? FixedPointType::Center
              : (re < 0.0 ? FixedPointType::StableFocus : FixedPointType::UnstableFocus);
  } else {
    const double a = l0.real(), b = l1.real();
    if (std::abs(a) < eps || std::abs(b) < eps)
      fp.type = FixedPointType::Degenerate;
    else if (a * b < 0.0)
      fp.type = FixedPointType::Saddle;
    else
      fp.type = (a < 0.0) ? FixedPointType::StableNode : FixedPointType::UnstableNode;
  }
  return fp;
}

}  // namespace detail

/// All equilibria of the planar field.  The origin comes first; the second
/// point exists when |beta - 2 alpha| is large enough to be distinguishable
/// from the origin.
inline std::vector<FixedPointInfo> fixed_points(double alpha, double beta) {
  std::vector<FixedPointInfo> out;
  out.push_back(detail::classify_fixed_point(alpha, beta, 0.0, 0.0));
  const double ustar = (beta - 2.0 * alpha) / 6.0;
  if (std::abs(ustar) > 1e-14)
    out.push_back(detail::classify_fixed_point(alpha, beta, ustar, 2.0 * ustar * ustar));
  for (const auto& fp : out) {
    const auto [p, q] = phase_rhs(alpha, beta, fp.u, fp.v);
    if (std::abs(p) + std::abs(q) >= 1e-12)
      throw std::logic_error("fixed_points: residual exceeds 1e-12");
  }
  return out;
}

// ---------------------------------------------------------------------------
// to_phase
// ---------------------------------------------------------------------------

/// Maximal windows [t_lo, t_hi] on which f keeps one definite sign
/// (dead-band 1e-12), in increasing order; windows spanning fewer than two
/// samples are dropped.
inline std::vector<std::pair<double, double>> sign_constant_intervals(const Profile& prof) {
  std::vector<std::pair<double, double>> out;
  int cur = 0;
  double lo = 0.0, hi = 0.0;
  auto flush = [&] {
    if (cur != 0 && lo < hi) out.emplace_back(lo, hi);
    cur = 0;
  };
  for (const Sample& s : prof.samples) {
    const int sg = detail::definite_sign(s.y.f);
    if (sg == 0 || (cur != 0 && sg != cur)) flush();
    if (sg != 0) {
      if (cur == 0) lo = s.t;
      cur = sg;
      hi = s.t;
    }
  }
  flush();
  return out;
}

namespace detail {

/// integral of f over [a, b] (one inter-sample gap or less): trapezoid
/// refined once by Richardson using the dense midpoint, i.e. Simpson.
inline double gap_quad(const Profile& prof, double a, double b) {
  const double fa = prof.at(a).f, fb = prof.at(b).f;
  const double fm = prof.at(0.5 * (a + b)).f;
  const double coarse = 0.5 * (b - a) * (fa + fb);
  const double fine = 0.25 * (b - a) * (fa + 2.0 * fm + fb);
  return fine + (fine - coarse) / 3.0;
}

}  // namespace detail

/// Transform the samples in [t_lo, t_hi] (default: the whole profile) with
/// base point tau, s(tau) = 0.  Output entries correspond, in order, to the
/// profile samples inside the window.  Throws FVanishesError if f has a zero
/// strictly inside the window or no definite sign at tau; boundary samples
/// sitting inside the dead-band are trimmed.
inline std::vector<PhaseState> to_phase(const Profile& prof, double tau,
                                        double t_lo = std::numeric_limits<double>::quiet_NaN(),
                                        double t_hi = std::numeric_limits<double>::quiet_NaN()) {
  if (prof.samples.size() < 2) throw std::invalid_argument("to_phase: profile too short");
  if (std::isnan(t_lo)) t_lo = prof.front().t;
  if (std::isnan(t_hi)) t_hi = prof.back().t;
  if (!(t_lo < t_hi) || tau < t_lo || tau > t_hi)
    throw std::invalid_argument("to_phase: need t_lo <= tau <= t_hi inside the sampled range");

  if (detail::definite_sign(prof.at(tau).f) == 0) throw FVanishesError(tau);

  // refuse interior zeros: logged crossings first, then dead-band samples
  for (const ProfileEvent& e : prof.events)
    if (e.kind == EventKind::FZeroCrossing && e.t > t_lo && e.t < t_hi) throw FVanishesError(e.t);

  std::size_t i0 = prof.samples.size(), i1 = 0;
  for (std::size_t i = 0; i < prof.samples.size(); ++i) {
    const double t = prof.samples[i].t;
    if (t < t_lo || t > t_hi) continue;
    if (i0 == prof.samples.size()) i0 = i;
    i1 = i;
  }
  if (i0 >= i1) throw std::invalid_argument("to_phase: window contains fewer than two samples");
  while (i0 < i1 && detail::definite_sign(prof.samples[i0].y.f) == 0) ++i0;
  while (i1 > i0 && detail::definite_sign(prof.samples[i1].y.f) == 0) --i1;
  const int sg = detail::definite_sign(prof.samples[i0].y.f);
  for (std::size_t i = i0; i <= i1; ++i) {
    const int si = detail::definite_sign(prof.samples[i].y.f);
    if (si == 0 || si != sg) throw FVanishesError(prof.samples[i].t);
  }

  // cumulative quadrature along the samples, then anchor at tau
  std::vector<double> svals(i1 - i0 + 1, 0.0);
  for (std::size_t i = i0 + 1; i <= i1; ++i)
    svals[i - i0] =
        svals[i - i0 - 1] + detail::gap_quad(prof, prof.samples[i - 1].t, prof.samples[i].t);

  double s_tau;
  if (tau <= prof.samples[i0].t) {
    s_tau = -detail::gap_quad(prof, tau, prof.samples[i0].t);
  } else if (tau >= prof.samples[i1].t) {
    s_tau = svals.back() + detail::gap_quad(prof, prof.samples[i1].t, tau);
  } else {
    auto it = std::upper_bound(
        prof.samples.begin() + static_cast<long>(i0), prof.samples.begin() + static_cast<long>(i1),
        tau, [](double val, const Sample& smp) { return val < smp.t; });
    const std::size_t k = static_cast<std::size_t>(it - prof.samples.begin()) - 1;
    s_tau = svals[k - i0] + detail::gap_quad(prof, prof.samples[k].t, tau);
  }

  std::vector<PhaseState> out;
  out.reserve(svals.size());
  for (std::size_t i = i0; i <= i1; ++i) {
    const auto [u, v] = to_phase_point(prof.samples[i].y);
    out.push_back({svals[i - i0] - s_tau, u, v});
  }
  return out;
}

// ---------------------------------------------------------------------------
// integrate_phase
// ---------------------------------------------------------------------------

struct PhasePoint {
  double s = 0.0;
  double u = 0.0, v = 0.0;
  double du = 0.0, dv = 0.0;
};

struct PhaseProfile {
  std::vector<PhasePoint> samples;
  Termination termination = Termination::ReachedTmax;
  double blowup_s = 0.0;

  double s_end() const { return samples.empty() ? 0.0 : samples.back().s; }

  /// Dense evaluation; the trajectory may run toward decreasing s.
  std::pair<double, double> at(double s) const {
    if (samples.empty()) throw std::logic_error("PhaseProfile::at on empty trajectory");
    const bool fwd = samples.back().s >= samples.front().s;
    const double key = fwd ? s : -s;
    auto proj = [fwd](const PhasePoint& p) { return fwd ? p.s : -p.s; };
    if (key <= proj(samples.front())) return {samples.front().u, samples.front().v};
    if (key >= proj(samples.back())) return {samples.back().u, samples.back().v};
    auto it = std::upper_bound(samples.begin(), samples.end(), key,
                               [&](double val, const PhasePoint& p) { return val < proj(p); });
    const PhasePoint& p1 = *it;
    const PhasePoint& p0 = *(it - 1);
    detail::DpPoint<2> a{p0.s, {p0.u, p0.v}, {p0.du, p0.dv}};
    detail::DpPoint<2> b{p1.s, {p1.u, p1.v}, {p1.du, p1.dv}};
    const auto y = detail::hermite_eval(a, b, s);
    return {y[0], y[1]};
  }
};

struct PhaseIvpSpec {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double blowup_threshold = 1e6;
  long max_steps = 500000;
};

/// Integrate the planar field from `init` (at arc position init.s) to s_end;
/// s may run in either direction.
inline PhaseProfile integrate_phase(double alpha, double beta, const PhaseState& init,
                                    double s_end, const PhaseIvpSpec& opt = {}) {
  PhaseProfile out;
  auto sys = [alpha, beta](double, const detail::Vec<2>& y, detail::Vec<2>& dy) {
    const auto [du, dv] = phase_rhs(alpha, beta, y[0], y[1]);
    dy[0] = du;
    dy[1] = dv;
  };
  {
    detail::Vec<2> d0{};
    sys(init.s, {init.u, init.v}, d0);
    out.samples.push_back({init.s, init.u, init.v, d0[0], d0[1]});
  }
  bool blew_up = false;
  auto on_step = [&](const detail::DpPoint<2>& p0, const detail::DpPoint<2>& p1) -> bool {
    const double mx = std::max(std::abs(p1.y[0]), std::abs(p1.y[1]));
    if (mx > opt.blowup_threshold) {
      double lo = p0.t, hi = p1.t;
      while (std::abs(hi - lo) > detail::kEventTimeTol) {
        const double mid = 0.5 * (lo + hi);
        const auto ym = detail::hermite_eval(p0, p1, mid);
        if (std::max(std::abs(ym[0]), std::abs(ym[1])) > opt.blowup_threshold)
          hi = mid;
        else
          lo = mid;
      }
      const double sb = 0.5 * (lo + hi);
      const auto yb = detail::hermite_eval(p0, p1, sb);
      detail::Vec<2> db{};
      sys(sb, yb, db);
      out.samples.push_back({sb, yb[0], yb[1], db[0], db[1]});
      out.termination = Termination::BlowUp;
      out.blowup_s = sb;
      blew_up = true;
      return false;
    }
    out.samples.push_back({p1.t, p1.y[0], p1.y[1], p1.dy[0], p1.dy[1]});
    return true;
  };
  const auto reason = detail::dp45_drive<2>(sys, {init.u, init.v}, init.s, s_end, opt.rel_tol,
                                            opt.abs_tol, opt.max_steps, on_step);
  if (blew_up)
    out.termination = Termination::BlowUp;
  else if (reason == detail::StopReason::ReachedEnd)
    out.termination = Termination::ReachedTmax;
  else if (reason == detail::StopReason::StepLimit)
    out.termination = Termination::StepLimitExceeded;
  else if (reason == detail::StopReason::StepUnderflow)
    out.termination = Termination::StepUnderflow;
  return out;
}

}  // namespace simbvp
