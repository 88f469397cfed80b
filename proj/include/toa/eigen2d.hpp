#pragma once

#include <cmath>
#include <numbers>

#include "toa/detail/matching.hpp"
#include "toa/eigen1d.hpp"
#include "toa/physparams.hpp"

namespace toa {

/// Scattering eigenstate of the 2D conditional Hamiltonian for incidence
/// (k_x, k_y), k_x > 0. k_y is conserved on both sides; the reflected ground
/// wave has k_x' = -k_x and the excited waves carry q_y = k_y + k_L.
struct EigenSolution2D {
  double k_x = 0.0;
  double k_y = 0.0;
  double delta_eff = 0.0;
  cplx lambda_plus, lambda_minus;
  cplx kx_plus, kx_minus;
  cplx q_x;
  double q_y = 0.0;
  cplx R1, R2;
  cplx C_plus, C_minus;
  cplx excited_plus, excited_minus;
  cplx denominator;
};

/// The branches depend on k_y only through delta_eff; this overload takes the
/// effective detuning directly.
inline EigenSolution2D solve_2d_at_detuning(const PhysParams& p, double k_x, double k_y,
                                            double delta_eff) {
  const auto m = detail::match_step(k_x, p.rabi, p.decay, delta_eff, p.two_mass_over_hbar());
  EigenSolution2D s;
  s.k_x = k_x;
  s.k_y = k_y;
  s.delta_eff = delta_eff;
  s.lambda_plus = m.lambda_plus;
  s.lambda_minus = m.lambda_minus;
  s.kx_plus = m.k_plus;
  s.kx_minus = m.k_minus;
  s.q_x = m.q;
  s.q_y = k_y + p.laser_wavenumber;
  s.R1 = m.r1;
  s.R2 = m.r2;
  s.C_plus = m.c_plus;
  s.C_minus = m.c_minus;
  s.excited_plus = m.b_plus;
  s.excited_minus = m.b_minus;
  s.denominator = m.denominator;
  return s;
}

inline EigenSolution2D solve_2d(const PhysParams& p, double k_x, double k_y) {
  p.validate();
  if (!std::isfinite(k_y)) throw ParameterError("solve_2d: non-finite k_y");
  return solve_2d_at_detuning(p, k_x, k_y, effective_detuning(p, k_y));
}

/// Phi_k(x, y) with the 1/(2 pi) normalization; region I for x < 0, II for x >= 0.
inline Spinor eigenstate_2d_at(const EigenSolution2D& s, double x, double y) {
  const cplx i(0.0, 1.0);
  const double norm = 0.5 / std::numbers::pi;
  const cplx ground_y = std::exp(i * s.k_y * y);
  const cplx excited_y = std::exp(i * s.q_y * y);
  if (x < 0.0) {
    return {norm * (std::exp(i * s.k_x * x) + s.R1 * std::exp(-i * s.k_x * x)) * ground_y,
            norm * s.R2 * std::exp(-i * s.q_x * x) * excited_y};
  }
  const cplx ep = std::exp(i * s.kx_plus * x);
  const cplx em = std::exp(i * s.kx_minus * x);
  return {norm * (s.C_plus * ep + s.C_minus * em) * ground_y,
          norm * (s.excited_plus * ep + s.excited_minus * em) * excited_y};
}

}  // namespace toa
