#pragma once

// Solution taxonomy: shape classes read off the sign pattern of f'' along a
// profile, and power-law growth detection for unbounded tails.  |f| ~ c t^p
// is fitted as a least-squares line on (log t, log |f|) over the final decade
// of the run; a fit is accepted only when r^2 >= 0.999.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "simbvp/integrate.hpp"

namespace simbvp {

// ---------------------------------------------------------------------------
// shape
// ---------------------------------------------------------------------------

enum class ShapeKind { Concave, ConvexConcave, ConcaveConvex, Convex, Mixed };

inline const char* shape_kind_name(ShapeKind k) {
  switch (k) {
    case ShapeKind::Concave: return "concave";
    case ShapeKind::ConvexConcave: return "convex_concave";
    case ShapeKind::ConcaveConvex: return "concave_convex";
    case ShapeKind::Convex: return "convex";
    default: return "mixed";
  }
}

struct ShapeClass {
  ShapeKind kind = ShapeKind::Concave;
  int sign_changes = 0;
  // f'' never left the dead-band; kind degrades to Concave by convention
  bool degenerate = false;

  friend bool operator==(const ShapeClass& a, const ShapeClass& b) {
    return a.kind == b.kind && a.sign_changes == b.sign_changes && a.degenerate == b.degenerate;
  }
};

/// Shape from the logged f'' sign flips plus the first definite sign.
/// Requires a run that reached its horizon; blow-up or truncated profiles
/// have no meaningful tail shape.
inline ShapeClass classify_shape(const Profile& prof) {
  if (prof.termination != Termination::ReachedTmax)
    throw std::invalid_argument(std::string("classify_shape: profile terminated ") +
                                termination_name(prof.termination));
  if (prof.samples.size() < 2) throw std::invalid_argument("classify_shape: profile too short");

  int first_sign = 0;
  for (const Sample& s : prof.samples) {
    first_sign = detail::definite_sign(s.y.fpp);
    if (first_sign != 0) break;
  }
  int flips = 0;
  for (const ProfileEvent& e : prof.events)
    if (e.kind == EventKind::FppSignChange) ++flips;

  ShapeClass out;
  out.sign_changes = flips;
  if (first_sign == 0) {
    out.degenerate = true;  // curvature indistinguishable from zero
    out.kind = ShapeKind::Concave;
    return out;
  }
  if (flips == 0)
    out.kind = (first_sign < 0) ? ShapeKind::Concave : ShapeKind::Convex;
  else if (flips == 1)
    out.kind = (first_sign > 0) ? ShapeKind::ConvexConcave : ShapeKind::ConcaveConvex;
  else
    out.kind = ShapeKind::Mixed;
  return out;
}

// ---------------------------------------------------------------------------
// asymptotic power-law fit
// ---------------------------------------------------------------------------

struct AsymptoticFit {
  double exponent = 0.0;
  double c_constant = 0.0;
  double t_lo = 0.0, t_hi = 0.0;  // fit window (final decade)
  double r_squared = 0.0;
  int n_points = 0;
};

enum class FitStatus { Ok, WindowTooShort, PoorFit };

inline const char* fit_status_name(FitStatus s) {
  switch (s) {
    case FitStatus::Ok: return "ok";
    case FitStatus::WindowTooShort: return "window_too_short";
    default: return "poor_fit";
  }
}

struct FitOutcome {
  FitStatus status = FitStatus::WindowTooShort;
  AsymptoticFit fit;  // populated whenever a regression was possible
};

class FitError : public std::runtime_error {
 public:
  FitError(FitStatus s, const AsymptoticFit& f)
      : std::runtime_error(std::string("asymptotic fit failed: ") + fit_status_name(s)),
        status_(s),
        fit_(f) {}
  FitStatus status() const { return status_; }
  const AsymptoticFit& partial() const { return fit_; }

 private:
  FitStatus status_;
  AsymptoticFit fit_;
};

/// Non-throwing fit.  The regression runs on log-spaced dense evaluations of
/// the profile across [t_end/10, t_end]; points where |f| vanishes carry no
/// information and are dropped.  Fewer than 20 usable points -> WindowTooShort.
inline FitOutcome try_fit_asymptotic(const Profile& prof) {
  if (prof.termination == Termination::BlowUp)
    throw std::invalid_argument("asymptotic fit: blow-up profiles have no power-law tail");
  if (prof.samples.size() < 2) throw std::invalid_argument("asymptotic fit: profile too short");

  FitOutcome out;
  const double t_end = prof.back().t;
  double t_lo = t_end / 10.0;
  // the window needs strictly positive t for log t
  for (const Sample& s : prof.samples)
    if (s.t > 0.0) {
      t_lo = std::max(t_lo, s.t);
      break;
    }
  if (!(t_end > 0.0) || !(t_lo < t_end)) return out;
  out.fit.t_lo = t_lo;
  out.fit.t_hi = t_end;

  constexpr int kFitPoints = 256;
  const double lr = std::log(t_end / t_lo);
  std::vector<double> xs, ys;
  xs.reserve(kFitPoints);
  ys.reserve(kFitPoints);
  for (int i = 0; i < kFitPoints; ++i) {
    const double t = t_lo * std::exp(lr * i / (kFitPoints - 1.0));
    const double f = prof.at(t).f;
    if (std::abs(f) < 1e-300) continue;
    xs.push_back(std::log(t));
    ys.push_back(std::log(std::abs(f)));
  }
  out.fit.n_points = static_cast<int>(xs.size());
  if (xs.size() < 20) return out;  // WindowTooShort

  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (slope * xs[i] + intercept);
    ss_res += r * r;
  }
  out.fit.exponent = slope;
  out.fit.c_constant = std::exp(intercept);
  out.fit.r_squared = (syy < 1e-30) ? (ss_res < 1e-30 ? 1.0 : 0.0) : 1.0 - ss_res / syy;
  out.status = (out.fit.r_squared >= 0.999) ? FitStatus::Ok : FitStatus::PoorFit;
  return out;
}

inline AsymptoticFit fit_asymptotic_exponent(const Profile& prof) {
  FitOutcome o = try_fit_asymptotic(prof);
  if (o.status != FitStatus::Ok) throw FitError(o.status, o.fit);
  return o.fit;
}

}  // namespace simbvp
