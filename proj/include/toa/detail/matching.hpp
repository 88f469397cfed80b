#pragma once

#include <cmath>
#include <string>

#include "toa/branch.hpp"
#include "toa/errors.hpp"

namespace toa::detail {

// Branch data and matching coefficients for incidence wavenumber k on the
// step at x = 0. Shared by the 1D and 2D solvers: the 2D problem has exactly
// this form with k -> k_x and the laser detuning replaced by the effective
// detuning.
struct MatchedBranches {
  cplx lambda_plus, lambda_minus;
  cplx k_plus, k_minus;
  cplx q;
  cplx r1, r2;
  cplx c_plus, c_minus;
  // Excited amplitudes of the transmitted branches, (2 lambda_pm / Omega) C_pm.
  cplx b_plus, b_minus;
  cplx denominator;
};

// |D| below this fraction of its term magnitudes is treated as degenerate.
inline constexpr double kDenominatorGuard = 1e-14;

inline MatchedBranches match_step(double k, double rabi, double decay, double detuning,
                                  double two_m_over_hbar) {
  if (!std::isfinite(k) || !std::isfinite(detuning)) {
    throw ParameterError("match_step: non-finite input");
  }
  if (!(k > 0.0)) throw ParameterError("incident wavenumber must be > 0");

  const cplx i(0.0, 1.0);
  const cplx detuning_c = detuning + 0.5 * i * decay;  // Delta + i gamma/2
  MatchedBranches m;
  m.q = decaying_sqrt(k * k + two_m_over_hbar * detuning_c);

  if (rabi == 0.0) {
    // Transparent limit: the ground-like branch is the free wave, the other
    // carries no amplitude. 2 lambda_+/Omega -> 0.
    m.lambda_plus = 0.0;
    m.lambda_minus = -detuning_c;
    m.k_plus = k;
    m.k_minus = m.q;
    m.r1 = m.r2 = 0.0;
    m.c_plus = 1.0;
    m.c_minus = 0.0;
    m.b_plus = m.b_minus = 0.0;
    m.denominator = -m.lambda_minus * (2.0 * k) * (2.0 * m.q);
    return m;
  }

  const DressedEigenvalues ev = dressed_eigenvalues(rabi, decay, detuning);
  m.lambda_plus = ev.plus;
  m.lambda_minus = ev.minus;
  m.k_plus = decaying_sqrt(k * k - two_m_over_hbar * ev.plus);
  m.k_minus = decaying_sqrt(k * k - two_m_over_hbar * ev.minus);

  const cplx& kp = m.k_plus;
  const cplx& km = m.k_minus;
  const cplx& q = m.q;
  const cplx t_plus = ev.plus * (k + km) * (q + kp);
  const cplx t_minus = ev.minus * (k + kp) * (q + km);
  const cplx d = t_plus - t_minus;
  const double scale = std::abs(t_plus) + std::abs(t_minus);
  if (!(std::abs(d) > kDenominatorGuard * scale)) {
    throw NumericalGuardError("degenerate matching denominator at k = " + std::to_string(k) +
                              " (exceptional point or resonance)");
  }
  m.denominator = d;
  m.c_plus = -2.0 * k * (q + km) * ev.minus / d;
  m.c_minus = 2.0 * k * (q + kp) * ev.plus / d;
  m.r2 = k * (km - kp) * rabi / d;
  m.r1 = (ev.plus * (q + kp) * (k - km) - ev.minus * (q + km) * (k - kp)) / d;
  // lambda_+ lambda_- = -Omega^2/4 removes the division by Omega.
  m.b_plus = k * rabi * (q + km) / d;
  m.b_minus = -k * rabi * (q + kp) / d;
  return m;
}

}  // namespace toa::detail
