#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "toa/detail/matching.hpp"
#include "toa/physparams.hpp"

namespace toa {

/// Two-component amplitude (ground, excited).
using Spinor = std::array<cplx, 2>;

/// Scattering eigenstate of the 1D conditional Hamiltonian for a ground-state
/// plane wave e^{ikx} incident from the left onto the laser edge at x = 0.
struct EigenSolution1D {
  double k = 0.0;
  cplx lambda_plus, lambda_minus;
  cplx k_plus, k_minus;
  cplx q;
  cplx R1, R2;
  cplx C_plus, C_minus;
  /// (2 lambda_pm / Omega) C_pm; finite for Omega -> 0.
  cplx excited_plus, excited_minus;
  cplx denominator;
};

inline EigenSolution1D solve_1d(const PhysParams& p, double k) {
  p.validate();
  const auto m = detail::match_step(k, p.rabi, p.decay, p.laser_detuning, p.two_mass_over_hbar());
  EigenSolution1D s;
  s.k = k;
  s.lambda_plus = m.lambda_plus;
  s.lambda_minus = m.lambda_minus;
  s.k_plus = m.k_plus;
  s.k_minus = m.k_minus;
  s.q = m.q;
  s.R1 = m.r1;
  s.R2 = m.r2;
  s.C_plus = m.c_plus;
  s.C_minus = m.c_minus;
  s.excited_plus = m.b_plus;
  s.excited_minus = m.b_minus;
  s.denominator = m.denominator;
  return s;
}

/// Phi_k(x) including the 1/sqrt(2 pi) delta normalization.
inline Spinor eigenstate_1d_at(const EigenSolution1D& s, double x) {
  const cplx i(0.0, 1.0);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  if (x < 0.0) {
    return {norm * (std::exp(i * s.k * x) + s.R1 * std::exp(-i * s.k * x)),
            norm * s.R2 * std::exp(-i * s.q * x)};
  }
  const cplx ep = std::exp(i * s.k_plus * x);
  const cplx em = std::exp(i * s.k_minus * x);
  return {norm * (s.C_plus * ep + s.C_minus * em),
          norm * (s.excited_plus * ep + s.excited_minus * em)};
}

}  // namespace toa
