#pragma once

// Similarity model for free convection along a vertical surface embedded in a
// saturated porous medium.  After the boundary-layer reduction the stream
// function profile f solves the autonomous third-order ODE
//
//     f''' + alpha * f * f'' - beta * f'^2 = 0        on [0, inf)
//
// where (alpha, beta) depend on the wall-condition family and the exponent m
// of the wall power law:
//
//   prescribed temperature:  alpha = (m+1)/2,  beta = m
//   prescribed heat flux:    alpha = m+2,      beta = 2m+1
//
// The wall mass-transfer parameter gamma enters through the boundary value
// f(0) = -gamma (gamma < 0: suction, gamma = 0: impermeable, gamma > 0:
// injection).

#include <cmath>
#include <stdexcept>
#include <string>

namespace simbvp {

enum class Family { PrescribedTemperature, PrescribedFlux, Generic };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::PrescribedTemperature: return "temperature";
    case Family::PrescribedFlux: return "flux";
    default: return "generic";
  }
}

/// (f, f', f'') at one abscissa.
struct State {
  double f = 0.0;
  double fp = 0.0;
  double fpp = 0.0;
};

struct ModelParams {
  Family family = Family::Generic;
  double m = 0.0;      // wall power-law exponent (family cases only)
  double gamma = 0.0;  // f(0) = -gamma
  double alpha = 0.0;
  double beta = 0.0;
};

inline ModelParams make_params(Family family, double m, double gamma) {
  ModelParams p;
  p.family = family;
  p.m = m;
  p.gamma = gamma;
  switch (family) {
    case Family::PrescribedTemperature:
      p.alpha = 0.5 * (m + 1.0);
      p.beta = m;
      break;
    case Family::PrescribedFlux:
      p.alpha = m + 2.0;
      p.beta = 2.0 * m + 1.0;
      break;
    default:
      throw std::invalid_argument("make_params: use make_generic_params for free (alpha, beta)");
  }
  return p;
}

inline ModelParams make_generic_params(double alpha, double beta, double gamma = 0.0) {
  ModelParams p;
  p.family = Family::Generic;
  p.alpha = alpha;
  p.beta = beta;
  p.gamma = gamma;
  return p;
}

/// f''' given the current state.
inline double rhs(const ModelParams& p, const State& y) {
  return -p.alpha * y.f * y.fpp + p.beta * y.fp * y.fp;
}

// ---------------------------------------------------------------------------
// Physical parameters -> gamma
// ---------------------------------------------------------------------------

/// Fluid/medium constants, all strictly positive.
struct MediumProperties {
  double viscosity = 1.0;          // mu
  double density = 1.0;            // rho_inf (ambient)
  double thermal_expansion = 1.0;  // volumetric coefficient
  double gravity = 1.0;
  double permeability = 1.0;
  double amplitude = 1.0;          // wall temperature/flux power-law amplitude
  double diffusivity = 1.0;        // effective thermal diffusivity
};

/// gamma = (2*omega/(m+1)) * sqrt(mu / (rho * b * g * k * A * lam)).
/// omega is the wall mass-flux coefficient; its sign carries over to gamma
/// for m > -1 (suction omega < 0, injection omega > 0).
inline double gamma_from_physical(double omega, double m, const MediumProperties& mp) {
  if (m == -1.0)
    throw std::invalid_argument("gamma_from_physical: m = -1 has no similarity reduction");
  const double pos[] = {mp.viscosity,     mp.density,   mp.thermal_expansion, mp.gravity,
                        mp.permeability,  mp.amplitude, mp.diffusivity};
  for (double v : pos)
    if (!(v > 0.0))
      throw std::invalid_argument("gamma_from_physical: medium constants must be positive");
  const double denom = mp.density * mp.thermal_expansion * mp.gravity * mp.permeability *
                       mp.amplitude * mp.diffusivity;
  return (2.0 * omega / (m + 1.0)) * std::sqrt(mp.viscosity / denom);
}

// ---------------------------------------------------------------------------
// Closed-form solutions (used as test oracles and for cheap sanity checks)
// ---------------------------------------------------------------------------

// Two parameter choices admit elementary solutions of the temperature-case
// boundary value problem f(0) = -gamma, f'(0) = 1, f'(inf) = 0:
//
//   m = 1:     f(t) = c - (c + gamma) e^{-c t},  c = (-gamma + sqrt(gamma^2+4))/2,
//              so c > 0 and c (c + gamma) = 1.
//   m = -1/3:  f(t) = L tanh(L (t + t0) / 6),    L = sqrt(6 + gamma^2),
//              tanh(L t0 / 6) = -gamma / L; here f'' + (f f')/3 = 0 along the
//              solution, hence f''(0) = gamma / 3.

struct ClosedFormSolution {
  enum class Kind { ExpRelaxation, TanhFront };

  Kind kind = Kind::ExpRelaxation;
  ModelParams params;
  double c = 0.0;   // ExpRelaxation rate/limit
  double L = 0.0;   // TanhFront limit
  double t0 = 0.0;  // TanhFront shift

  State eval(double t) const {
    State y;
    if (kind == Kind::ExpRelaxation) {
      const double g = params.gamma;
      const double e = std::exp(-c * t);
      y.f = c - (c + g) * e;
      y.fp = c * (c + g) * e;
      y.fpp = -c * c * (c + g) * e;
    } else {
      const double u = L * (t + t0) / 6.0;
      const double th = std::tanh(u);
      const double sech2 = 1.0 - th * th;
      y.f = L * th;
      y.fp = L * L / 6.0 * sech2;
      y.fpp = -(L * L * L / 18.0) * th * sech2;
    }
    return y;
  }

  double third_derivative(double t) const {
    if (kind == Kind::ExpRelaxation) {
      const double g = params.gamma;
      return c * c * c * (c + g) * std::exp(-c * t);
    }
    const double u = L * (t + t0) / 6.0;
    const double th = std::tanh(u);
    const double sech2 = 1.0 - th * th;
    return -(L * L * L * L / 108.0) * sech2 * (1.0 - 3.0 * th * th);
  }

  /// f(inf)
  double limit() const { return kind == Kind::ExpRelaxation ? c : L; }
};

inline ClosedFormSolution closed_form_m1(double gamma) {
  ClosedFormSolution s;
  s.kind = ClosedFormSolution::Kind::ExpRelaxation;
  s.params = make_params(Family::PrescribedTemperature, 1.0, gamma);
  s.c = 0.5 * (-gamma + std::sqrt(gamma * gamma + 4.0));
  return s;
}

inline ClosedFormSolution closed_form_m_third(double gamma) {
  ClosedFormSolution s;
  s.kind = ClosedFormSolution::Kind::TanhFront;
  s.params = make_params(Family::PrescribedTemperature, -1.0 / 3.0, gamma);
  s.L = std::sqrt(6.0 + gamma * gamma);
  s.t0 = 6.0 / s.L * std::atanh(-gamma / s.L);
  return s;
}

}  // namespace simbvp
