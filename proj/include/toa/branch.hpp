#pragma once

// Root selection for every complex square root in the scattering solvers.
// Both the dressed eigenvalues and the branch wavenumbers go through here so
// that a single sheet convention holds throughout.

#include <complex>

namespace toa {

using cplx = std::complex<double>;

/// Root with positive imaginary part (wave decays into its half space). When
/// the imaginary part vanishes exactly the root with Re > 0 is returned
/// (outgoing wave).
inline cplx decaying_sqrt(cplx z) {
  cplx r = std::sqrt(z);
  if (r.imag() < 0.0 || (r.imag() == 0.0 && r.real() < 0.0)) r = -r;
  return r;
}

/// Root with positive real part; on the imaginary axis the root with
/// Im >= 0 is returned. This is the sheet on which lambda_+ -> 0 as the
/// Rabi frequency vanishes (for decay > 0), i.e. "+" labels the ground-like
/// dressed state.
inline cplx dressed_sqrt(cplx z) {
  cplx r = std::sqrt(z);
  if (r.real() == 0.0) r = cplx(0.0, std::abs(r.imag()));
  return r;
}

/// Complex frequencies of the dressed two-level system in the laser region,
///   lambda_pm = -(i gamma + 2 Delta)/4 +- (i/4) sqrt((gamma - 2 i Delta)^2 - 4 Omega^2).
struct DressedEigenvalues {
  cplx plus;
  cplx minus;
};

inline DressedEigenvalues dressed_eigenvalues(double rabi, double decay, double detuning) {
  const cplx i(0.0, 1.0);
  const cplx g(decay, -2.0 * detuning);
  const cplx s = dressed_sqrt(g * g - 4.0 * rabi * rabi);
  const cplx centre = -(i * decay + 2.0 * detuning) / 4.0;
  DressedEigenvalues ev{centre + 0.25 * i * s, centre - 0.25 * i * s};
  // The smaller root suffers cancellation; recover it from
  // lambda_+ lambda_- = -Omega^2 / 4.
  const cplx product = -0.25 * rabi * rabi;
  if (std::abs(ev.plus) >= std::abs(ev.minus)) {
    if (ev.plus != cplx(0.0)) ev.minus = product / ev.plus;
  } else {
    ev.plus = product / ev.minus;
  }
  return ev;
}

}  // namespace toa
