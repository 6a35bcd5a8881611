// Self-contained property suites: structural identities of the equation
// (scaling covariance, the beta = -alpha first integral), the phase-plane
// conjugacy on a closed form, fixed-point residuals, and a fit self-test.
// These are the checks a build must pass before its numbers are trusted.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "simbvp/classify.hpp"
#include "simbvp/integrate.hpp"
#include "simbvp/model.hpp"
#include "simbvp/phaseplane.hpp"

namespace simbvp {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;      // largest deviation seen, in the check's own metric
  double threshold = 0.0;  // what `worst` had to stay below
  int cases = 0;
  std::string note;
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

inline constexpr unsigned kVerifySeed = 20240801u;

namespace detail {

/// Draw initial data until the run reaches its horizon; parameter scale and
/// horizon are chosen so most draws survive.
template <class Rng>
inline IvpSpec draw_surviving_ivp(Rng& rng, double t_max, bool beta_minus_alpha) {
  std::uniform_real_distribution<double> coef(-1.5, 1.5);
  std::uniform_real_distribution<double> init(-0.8, 0.8);
  for (int tries = 0; tries < 400; ++tries) {
    const double a = coef(rng);
    const double b = beta_minus_alpha ? -a : coef(rng);
    IvpSpec spec;
    spec.params = make_generic_params(a, b);
    spec.initial = {init(rng), init(rng), init(rng)};
    spec.t_max = t_max;
    // comparisons below sit at 1e-6; keep truncation error well under that
    spec.rel_tol = 1e-10;
    spec.abs_tol = 1e-12;
    if (integrate(spec).termination == Termination::ReachedTmax) return spec;
  }
  throw std::runtime_error("verify: could not draw a surviving instance");
}

}  // namespace detail

/// If f solves the equation then so does kappa f(kappa t): re-integrating
/// from the scaled initial data must land on the rescaled profile.
inline CheckResult verify_scaling_covariance(unsigned seed = kVerifySeed) {
  CheckResult res;
  res.name = "scaling_covariance";
  res.threshold = 1e-6;
  std::mt19937 rng(seed);
  double worst = 0.0;
  for (int n = 0; n < 50; ++n) {
    auto spec = detail::draw_surviving_ivp(rng, 3.0, false);
    const auto base = integrate(spec);
    double sup_f = 1.0, sup_fp = 1.0, sup_fpp = 1.0;
    for (const auto& s : base.samples) {
      sup_f = std::max(sup_f, std::abs(s.y.f));
      sup_fp = std::max(sup_fp, std::abs(s.y.fp));
      sup_fpp = std::max(sup_fpp, std::abs(s.y.fpp));
    }
    for (double kappa : {0.5, 2.0}) {
      const double k2 = kappa * kappa, k3 = k2 * kappa;
      IvpSpec scaled = spec;
      scaled.initial = {kappa * spec.initial.f, k2 * spec.initial.fp, k3 * spec.initial.fpp};
      scaled.t_max = spec.t_max / kappa;
      const auto redo = integrate(scaled);
      if (redo.termination != Termination::ReachedTmax) continue;  // threshold artifact
      const auto target = scale_solution(base, kappa);
      for (const auto& s : target.samples) {
        const auto y = redo.at(s.t);
        const double d = std::max({std::abs(y.f - s.y.f) / (kappa * sup_f),
                                   std::abs(y.fp - s.y.fp) / (k2 * sup_fp),
                                   std::abs(y.fpp - s.y.fpp) / (k3 * sup_fpp)});
        worst = std::max(worst, d);
      }
      res.cases++;
    }
  }
  res.worst = worst;
  res.passed = res.cases >= 90 && worst < res.threshold;
  res.note = "kappa in {0.5, 2} over random instances";
  return res;
}

/// With beta = -alpha the equation collapses to (f'' + alpha f f')' = 0, so
/// E = f'' + alpha f f' is constant along every orbit.
inline CheckResult verify_first_integral(unsigned seed = kVerifySeed + 1) {
  CheckResult res;
  res.name = "first_integral";
  res.threshold = 1e-6;
  std::mt19937 rng(seed);
  double worst = 0.0;
  for (int n = 0; n < 20; ++n) {
    auto spec = detail::draw_surviving_ivp(rng, 10.0, true);
    const auto prof = integrate(spec);
    const double a = spec.params.alpha;
    const double e0 = prof.front().y.fpp + a * prof.front().y.f * prof.front().y.fp;
    for (const auto& s : prof.samples)
      worst = std::max(worst, std::abs(s.y.fpp + a * s.y.f * s.y.fp - e0));
    res.cases++;
  }
  res.worst = worst;
  res.passed = res.cases == 20 && worst < res.threshold;
  res.note = "drift of f'' + alpha f f' with beta = -alpha";
  return res;
}

/// The coordinate change and the planar field must tell the same story: push
/// the exponential closed form through the transform, then re-grow the curve
/// by integrating the planar field from its first point.
inline CheckResult verify_phase_conjugacy() {
  CheckResult res;
  res.name = "phase_conjugacy";
  res.threshold = 1e-6;
  const auto cf = closed_form_m1(5.0);  // f stays negative far beyond t = 4
  std::vector<double> ts;
  for (int i = 0; i <= 800; ++i) ts.push_back(4.0 * i / 800.0);
  const auto prof = Profile::from_function(
      [&](double t) { return cf.eval(t).f; }, [&](double t) { return cf.eval(t).fp; },
      [&](double t) { return cf.eval(t).fpp; }, [&](double t) { return cf.third_derivative(t); },
      ts);
  const auto ps = to_phase(prof, 0.0);
  PhaseIvpSpec spec;
  spec.rel_tol = 1e-10;
  spec.abs_tol = 1e-12;
  // march sample to sample so the comparison measures the flow, not the
  // dense interpolant between wide adaptive steps
  PhaseState state = ps.front();
  double worst = 0.0;
  for (std::size_t i = 1; i < ps.size(); ++i) {
    const auto leg = integrate_phase(cf.params.alpha, cf.params.beta, state, ps[i].s, spec);
    if (leg.termination != Termination::ReachedTmax) break;
    const auto& end = leg.samples.back();
    worst = std::max({worst, std::abs(end.u - ps[i].u), std::abs(end.v - ps[i].v)});
    state = PhaseState{end.s, end.u, end.v};
    res.cases++;
  }
  res.worst = worst;
  res.passed = res.cases > 0 && worst < res.threshold;
  res.note = "closed form at m=1, gamma=5 on [0, 4]";
  return res;
}

/// Every reported fixed point must actually sit on P = Q = 0.
inline CheckResult verify_fixed_point_residuals(unsigned seed = kVerifySeed + 2) {
  CheckResult res;
  res.name = "fixed_point_residuals";
  res.threshold = 1e-12;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const double a = coef(rng), b = coef(rng);
    for (const auto& fp : fixed_points(a, b)) {
      const auto [p, q] = phase_rhs(a, b, fp.u, fp.v);
      worst = std::max(worst, std::abs(p) + std::abs(q));
      res.cases++;
    }
  }
  res.worst = worst;
  res.passed = res.cases >= 100 && worst < res.threshold;
  res.note = "|P| + |Q| at every returned fixed point";
  return res;
}

/// The exponent fitter must recover a tail it is handed directly.
inline CheckResult verify_exponent_selftest() {
  CheckResult res;
  res.name = "exponent_selftest";
  res.threshold = 1e-3;
  std::vector<double> ts;
  for (int i = 0; i <= 4000; ++i) ts.push_back(1.0 + 99.0 * i / 4000.0);
  const auto prof = Profile::from_function(
      [](double t) { return std::pow(t, 0.3); },
      [](double t) { return 0.3 * std::pow(t, -0.7); },
      [](double t) { return -0.21 * std::pow(t, -1.7); },
      [](double t) { return 0.357 * std::pow(t, -2.7); }, ts);
  const auto out = try_fit_asymptotic(prof);
  res.cases = out.fit.n_points;
  res.worst = std::abs(out.fit.exponent - 0.3);
  res.passed = out.status == FitStatus::Ok && res.worst < res.threshold;
  res.note = "synthetic t^0.3 tail";
  return res;
}

inline VerifyReport run_verification(unsigned seed = kVerifySeed) {
  VerifyReport rep;
  rep.checks.push_back(verify_scaling_covariance(seed));
  rep.checks.push_back(verify_first_integral(seed + 1));
  rep.checks.push_back(verify_phase_conjugacy());
  rep.checks.push_back(verify_fixed_point_residuals(seed + 2));
  rep.checks.push_back(verify_exponent_selftest());
  return rep;
}

}  // namespace simbvp
