#pragma once

#include <array>
#include <complex>

namespace toa::detail {

using Mat2 = std::array<std::complex<double>, 4>;  // row major: a b / c d

// exp(M) for a complex 2x2 matrix, M = c I + N with N traceless:
// exp(M) = e^c (cosh(s) I + sinh(s)/s N), s^2 = -det N. Uniform across
// distinct, degenerate and defective spectra.
inline Mat2 expm2(const Mat2& m) {
  using cplx = std::complex<double>;
  const cplx c = 0.5 * (m[0] + m[3]);
  const cplx n00 = m[0] - c;
  const cplx s2 = n00 * n00 + m[1] * m[2];
  const cplx s = std::sqrt(s2);
  cplx ch, shc;  // e^c cosh(s), e^c sinh(s)/s
  if (std::abs(s) < 1e-4) {
    const cplx e = std::exp(c);
    ch = e * (1.0 + s2 / 2.0 + s2 * s2 / 24.0 + s2 * s2 * s2 / 720.0);
    shc = e * (1.0 + s2 / 6.0 + s2 * s2 / 120.0 + s2 * s2 * s2 / 5040.0);
  } else {
    // Separate exponentials keep e^c cosh(s) finite when |c| and |s| are both large.
    const cplx up = std::exp(c + s);
    const cplx down = std::exp(c - s);
    ch = 0.5 * (up + down);
    shc = 0.5 * (up - down) / s;
  }
  return {ch + shc * n00, shc * m[1], shc * m[2], ch - shc * n00};
}

// Generator -i H/hbar of the conditional two-level Hamiltonian at a point
// inside the laser with the e^{+-i k_L y} phases removed:
//   H/hbar = [[0, Omega/2], [Omega/2, -(Delta_L + i gamma/2)]].
inline Mat2 two_level_generator(double rabi, double decay, double detuning, bool illuminated) {
  using cplx = std::complex<double>;
  const cplx i(0.0, 1.0);
  const double coupling = illuminated ? 0.5 * rabi : 0.0;
  return {cplx(0.0), -i * coupling, -i * coupling, i * cplx(detuning, 0.5 * decay)};
}

inline Mat2 scale(const Mat2& m, double t) { return {m[0] * t, m[1] * t, m[2] * t, m[3] * t}; }

}  // namespace toa::detail
