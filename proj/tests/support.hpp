#pragma once

// Independent checks shared by the unit tests and the acceptance binary: the
// matching identities evaluated from the returned coefficients, and the
// conditional Hamiltonian applied analytically to the plane-wave terms.

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "toa/eigen1d.hpp"
#include "toa/eigen2d.hpp"
#include "toa/physparams.hpp"

namespace toa::testing {

using cplx = std::complex<double>;

// |a - b| relative to the largest magnitude entering either side.
inline double rel_gap(cplx lhs, cplx rhs, std::initializer_list<cplx> terms) {
  double scale = 0.0;
  for (const cplx& t : terms) scale = std::max(scale, std::abs(t));
  return scale > 0.0 ? std::abs(lhs - rhs) / scale : std::abs(lhs - rhs);
}

/// Worst of the four continuity identities at x = 0 (value and slope of both
/// components). Requires rabi > 0.
inline double matching_residual(cplx k, cplx kp, cplx km, cplx q, cplx lp, cplx lm, cplx r1,
                                cplx r2, cplx cp, cplx cm, double rabi) {
  const cplx bp = 2.0 * lp / rabi * cp;
  const cplx bm = 2.0 * lm / rabi * cm;
  double worst = rel_gap(1.0 + r1, cp + cm, {1.0, r1, cp, cm});
  worst = std::max(worst, rel_gap(r2, bp + bm, {r2, bp, bm}));
  worst = std::max(worst, rel_gap(k * (1.0 - r1), kp * cp + km * cm, {k, k * r1, kp * cp, km * cm}));
  worst = std::max(worst, rel_gap(-q * r2, kp * bp + km * bm, {q * r2, kp * bp, km * bm}));
  return worst;
}

inline double matching_residual(const EigenSolution2D& s, double rabi) {
  return matching_residual(s.k_x, s.kx_plus, s.kx_minus, s.q_x, s.lambda_plus, s.lambda_minus, s.R1,
                           s.R2, s.C_plus, s.C_minus, rabi);
}

inline double matching_residual(const EigenSolution1D& s, double rabi) {
  return matching_residual(s.k, s.k_plus, s.k_minus, s.q, s.lambda_plus, s.lambda_minus, s.R1, s.R2,
                           s.C_plus, s.C_minus, rabi);
}

// One plane-wave term: amplitude * exp(i (kx x + ky y)).
struct Wave {
  cplx amp;
  cplx kx;
  double ky;
};

inline cplx eval(const std::vector<Wave>& w, double x, double y) {
  cplx acc = 0.0;
  for (const auto& t : w) acc += t.amp * std::exp(cplx(0.0, 1.0) * (t.kx * x + t.ky * y));
  return acc;
}

// (hbar/2m) (-laplacian) applied termwise.
inline cplx kinetic(const std::vector<Wave>& w, double x, double y, double hm2) {
  cplx acc = 0.0;
  for (const auto& t : w) {
    acc += hm2 * (t.kx * t.kx + t.ky * t.ky) * t.amp * std::exp(cplx(0.0, 1.0) * (t.kx * x + t.ky * y));
  }
  return acc;
}

// Same sums with every term replaced by its modulus.
inline double eval_abs(const std::vector<Wave>& w, double x, double y) {
  double acc = 0.0;
  for (const auto& t : w) acc += std::abs(t.amp * std::exp(cplx(0.0, 1.0) * (t.kx * x + t.ky * y)));
  return acc;
}

inline double kinetic_abs(const std::vector<Wave>& w, double x, double y, double hm2) {
  double acc = 0.0;
  for (const auto& t : w) {
    acc += hm2 * std::abs((t.kx * t.kx + t.ky * t.ky) * t.amp * std::exp(cplx(0.0, 1.0) * (t.kx * x + t.ky * y)));
  }
  return acc;
}

/// Residual of the stationary equation (H - E) Phi = 0 in frequency units at
/// (x, y), built from the coefficients alone and scaled by the termwise
/// moduli of each row:
///   ground:  T g + (Omega/2) theta e^{-i kL y} e - w g
///   excited: T e + (Omega/2) theta e^{+i kL y} g - (Delta_L + i gamma/2) e - w e
inline double stationarity_residual(const PhysParams& p, const EigenSolution2D& s, double x, double y) {
  const double hm2 = 0.5 * p.hbar_over_mass();
  const double w = hm2 * (s.k_x * s.k_x + s.k_y * s.k_y);
  const cplx i(0.0, 1.0);
  std::vector<Wave> g, e;
  const bool lit = x >= 0.0;
  if (!lit) {
    g = {{1.0, s.k_x, s.k_y}, {s.R1, -s.k_x, s.k_y}};
    e = {{s.R2, -s.q_x, s.q_y}};
  } else {
    g = {{s.C_plus, s.kx_plus, s.k_y}, {s.C_minus, s.kx_minus, s.k_y}};
    const cplx bp = p.rabi > 0.0 ? 2.0 * s.lambda_plus / p.rabi * s.C_plus : s.excited_plus;
    const cplx bm = p.rabi > 0.0 ? 2.0 * s.lambda_minus / p.rabi * s.C_minus : s.excited_minus;
    e = {{bp, s.kx_plus, s.q_y}, {bm, s.kx_minus, s.q_y}};
  }
  const double theta = lit ? 1.0 : 0.0;
  const cplx gv = eval(g, x, y), ev = eval(e, x, y);
  const cplx tg = kinetic(g, x, y, hm2), te = kinetic(e, x, y, hm2);
  const cplx cg = 0.5 * p.rabi * theta * std::exp(-i * p.laser_wavenumber * y) * ev;
  const cplx ce = 0.5 * p.rabi * theta * std::exp(i * p.laser_wavenumber * y) * gv;
  const cplx de = -(p.laser_detuning + 0.5 * i * p.decay) * ev;
  const double ga = eval_abs(g, x, y), ea = eval_abs(e, x, y);
  const double half = 0.5 * p.rabi * theta;
  const double r1 = std::abs(tg + cg - w * gv) /
                    std::max({kinetic_abs(g, x, y, hm2), half * ea, w * ga, 1e-300});
  const double r2 = std::abs(te + ce + de - w * ev) /
                    std::max({kinetic_abs(e, x, y, hm2), half * ga,
                              std::abs(cplx(p.laser_detuning, 0.5 * p.decay)) * ea, w * ea, 1e-300});
  return std::max(r1, r2);
}

/// Random valid parameters spanning weak to strong driving, detuned and
/// resonant, with velocities from mm/s to tens of m/s.
struct RandomCase {
  PhysParams p;
  double k_x = 0.0, k_y = 0.0;
};

inline RandomCase random_case(std::mt19937_64& rng) {
  auto log_uniform = [&](double a, double b) {
    return std::exp(std::uniform_real_distribution<double>(std::log(a), std::log(b))(rng));
  };
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  RandomCase c;
  c.p.mass = log_uniform(1e-27, 1e-24);
  c.p.decay = log_uniform(1e3, 1e9);
  c.p.rabi = c.p.decay * log_uniform(1e-2, 1e1);
  c.p.laser_detuning = c.p.decay * 5.0 * unit(rng);
  c.p.laser_wavenumber = std::uniform_real_distribution<double>(0.0, 1.5e7)(rng);
  c.k_x = c.p.mass * log_uniform(1e-3, 30.0) / kHbar;
  c.k_y = c.p.mass * 30.0 * unit(rng) / kHbar;
  return c;
}

}  // namespace toa::testing
