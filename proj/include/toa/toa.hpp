#pragma once

// First-photon distribution Pi(t) from the stationary scattering states.
//
// With the packet expanded in eigenstates, the x, y and k_y' integrals of
// gamma * int |Psi_excited|^2 are done in closed form, leaving
//
//   Pi(t) = gamma/(2 pi) int dk_y int dk_x int dk_x'
//           conj(psi~(k_x,k_y)) psi~(k_x',k_y) K(k_x,k_x';k_y) e^{-i hbar (k_x'^2 - k_x^2) t / 2m}
//
// where K is a sum of Cauchy terms i conj(a) b' / (kappa' - conj(kappa)) over
// the reflected excited wave (a = R2, kappa = q_x) and the four pairs of
// transmitted branches (a = (2 lambda/Omega) C, kappa = k_x^pm). K is
// Hermitian in (k_x, k_x'), so Pi is real up to rounding.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "toa/detail/parallel.hpp"
#include "toa/eigen1d.hpp"
#include "toa/eigen2d.hpp"
#include "toa/packet.hpp"
#include "toa/physparams.hpp"
#include "toa/quadrature.hpp"

namespace toa {

struct QuadratureSpec {
  int n_kx = 96;
  int n_ky = 64;
  double span_sigmas = 6.0;
  std::vector<double> times;
  /// Skip the negative-k mass guard (diagnostic runs only).
  bool allow_truncation = false;
  /// Worker cap; 0 means hardware concurrency. Results do not depend on it.
  unsigned threads = 0;

  void validate() const {
    if (n_kx < 8 || n_ky < 8) throw ParameterError("QuadratureSpec: node counts must be >= 8");
    if (!(span_sigmas > 0.0)) throw ParameterError("QuadratureSpec: span_sigmas must be > 0");
    if (times.empty()) throw ParameterError("QuadratureSpec: no time samples");
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!std::isfinite(times[i]) || times[i] < 0.0) {
        throw ParameterError("QuadratureSpec: times must be finite and >= 0");
      }
      if (i > 0 && !(times[i] > times[i - 1])) {
        throw ParameterError("QuadratureSpec: times must be strictly increasing");
      }
    }
  }
};

/// n uniformly spaced samples on [t0, t1].
inline std::vector<double> uniform_times(double t0, double t1, int n) {
  if (n < 2 || !(t1 > t0)) throw ParameterError("uniform_times: need n >= 2 and t1 > t0");
  std::vector<double> t(n);
  const double dt = (t1 - t0) / (n - 1);
  for (int i = 0; i < n; ++i) t[i] = t0 + i * dt;
  return t;
}

/// Sampled arrival-time density. pi_values is stored raw (may dip slightly
/// below zero from quadrature error); use clipped() for reporting only.
struct ToaSeries {
  std::vector<double> times;
  std::vector<double> pi_values;
  std::vector<double> cumulative;
  /// max_t |Im Pi(t)| / max_t |Pi(t)| from the quadrature, 0 when not applicable.
  double max_imag_ratio = 0.0;
  nlohmann::json metadata = nlohmann::json::object();

  std::vector<double> clipped() const {
    std::vector<double> out(pi_values);
    for (auto& v : out) v = std::max(v, 0.0);
    return out;
  }

  double peak() const {
    double m = 0.0;
    for (double v : pi_values) m = std::max(m, v);
    return m;
  }

  void update_cumulative() {
    cumulative.assign(pi_values.size(), 0.0);
    for (std::size_t i = 1; i < pi_values.size(); ++i) {
      cumulative[i] =
          cumulative[i - 1] + 0.5 * (times[i] - times[i - 1]) * (pi_values[i] + pi_values[i - 1]);
    }
  }
};

/// Trapezoidal integral of |a - b| over the integral of |b|; grids must match.
inline double relative_l1_distance(const ToaSeries& a, const ToaSeries& b) {
  if (a.times.size() != b.times.size()) {
    throw ParameterError("relative_l1_distance: series lengths differ");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 1; i < a.times.size(); ++i) {
    const double h = 0.5 * (b.times[i] - b.times[i - 1]);
    num += h * (std::abs(a.pi_values[i] - b.pi_values[i]) +
                std::abs(a.pi_values[i - 1] - b.pi_values[i - 1]));
    den += h * (std::abs(b.pi_values[i]) + std::abs(b.pi_values[i - 1]));
  }
  return den > 0.0 ? num / den : (num > 0.0 ? INFINITY : 0.0);
}

namespace detail {

// Per-node data entering the Cauchy kernel.
struct KernelNode {
  cplx r2, q;
  cplx b_plus, b_minus;
  cplx k_plus, k_minus;
};

inline KernelNode kernel_node(const EigenSolution1D& s) {
  return {s.R2, s.q, s.excited_plus, s.excited_minus, s.k_plus, s.k_minus};
}

inline KernelNode kernel_node(const EigenSolution2D& s) {
  return {s.R2, s.q_x, s.excited_plus, s.excited_minus, s.kx_plus, s.kx_minus};
}

inline cplx cauchy(cplx a_bar, cplx b, cplx kappa_prime, cplx kappa) {
  const cplx den = kappa_prime - std::conj(kappa);
  if (!(std::abs(den) > 0.0) || !std::isfinite(std::abs(den))) {
    throw NumericalGuardError("kernel denominator underflow (non-decaying branch)");
  }
  return cplx(0.0, 1.0) * a_bar * b / den;
}

// Dense Hermitian kernel K[i * n + j] for one k_y slice.
inline std::vector<cplx> build_kernel(const std::vector<KernelNode>& nodes) {
  const std::size_t n = nodes.size();
  std::vector<cplx> kernel(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const KernelNode& a = nodes[i];
    const cplx r2_bar = std::conj(a.r2), bp_bar = std::conj(a.b_plus), bm_bar = std::conj(a.b_minus);
    for (std::size_t j = 0; j < n; ++j) {
      const KernelNode& b = nodes[j];
      cplx sum = cauchy(r2_bar, b.r2, b.q, a.q);
      sum += cauchy(bp_bar, b.b_plus, b.k_plus, a.k_plus);
      sum += cauchy(bp_bar, b.b_minus, b.k_minus, a.k_plus);
      sum += cauchy(bm_bar, b.b_plus, b.k_plus, a.k_minus);
      sum += cauchy(bm_bar, b.b_minus, b.k_minus, a.k_minus);
      kernel[i * n + j] = sum;
    }
  }
  return kernel;
}

// sum_ij conj(u_i) K_ij u_j with u_i = amp_i e^{-i omega_i t}.
inline cplx quadratic_form(const std::vector<cplx>& kernel, const std::vector<cplx>& amp,
                           const std::vector<double>& omega, double t, std::vector<cplx>& u) {
  const std::size_t n = amp.size();
  for (std::size_t i = 0; i < n; ++i) u[i] = amp[i] * std::polar(1.0, -omega[i] * t);
  cplx total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx* row = &kernel[i * n];
    cplx acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * u[j];
    total += std::conj(u[i]) * acc;
  }
  return total;
}

inline QuadratureRule kx_rule(const GaussianPacket1D& g, const QuadratureSpec& q) {
  const double sigma = g.sigma_k();
  const double floor = 1e-4 * sigma;
  const double lo = std::max(g.k0 - q.span_sigmas * sigma, floor);
  const double hi = g.k0 + q.span_sigmas * sigma;
  if (!(hi > lo)) throw ParameterError("k_x grid is empty: packet moves away from the laser");
  return gauss_legendre(q.n_kx, lo, hi);
}

// Phase windings of psi~(k) e^{-i hbar k^2 t / 2m} across the k_x window at
// the last time sample. Gauss-Legendre aliases once n_kx falls below roughly
// this count (observed failures at 0.6-0.7 x), so n_kx >= windings is required.
inline double phase_windings(const GaussianPacket1D& g, const QuadratureRule& rule,
                             double hbar_over_mass, double t_max) {
  const double lo = rule.nodes.front(), hi = rule.nodes.back();
  const double reach = std::max(std::abs(g.x0 + hbar_over_mass * lo * t_max),
                                std::abs(g.x0 + hbar_over_mass * hi * t_max));
  return reach * (hi - lo) / (2.0 * std::numbers::pi);
}

inline void check_windings(const GaussianPacket1D& g, const QuadratureRule& rule, const PhysParams& p,
                           const QuadratureSpec& q, ToaSeries& s) {
  const double w = phase_windings(g, rule, p.hbar_over_mass(), q.times.back());
  s.metadata["phase_windings"] = w;
  if (static_cast<double>(q.n_kx) < w) {
    throw NumericalGuardError("n_kx = " + std::to_string(q.n_kx) + " aliases the time phase (" +
                              std::to_string(static_cast<int>(std::ceil(w))) +
                              " windings at t_max); raise n_kx or shorten the window");
  }
}

inline void check_truncation(const GaussianPacket1D& g, const QuadratureSpec& q) {
  if (q.allow_truncation) return;
  const double lost = g.negative_k_mass();
  if (lost > kNegativeMassThreshold) {
    throw NumericalGuardError("packet has " + std::to_string(lost) +
                              " probability at k_x < 0 (threshold 1e-6)");
  }
}

inline void finish_series(ToaSeries& s, const std::vector<cplx>& raw) {
  double peak = 0.0, imag = 0.0;
  s.pi_values.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    s.pi_values[i] = raw[i].real();
    peak = std::max(peak, std::abs(raw[i].real()));
    imag = std::max(imag, std::abs(raw[i].imag()));
  }
  s.max_imag_ratio = peak > 0.0 ? imag / peak : 0.0;
  s.update_cumulative();
}

}  // namespace detail

/// Pi(t) of the 1D model for a Gaussian packet incident from the left.
inline ToaSeries pi_1d(const PhysParams& p, const GaussianPacket1D& g, const QuadratureSpec& q) {
  p.validate();
  g.validate();
  q.validate();
  detail::check_truncation(g, q);

  ToaSeries series;
  series.times = q.times;
  const std::size_t nt = q.times.size();
  std::vector<cplx> raw(nt, 0.0);
  if (p.decay == 0.0 || p.rabi == 0.0) {
    detail::finish_series(series, raw);
    return series;
  }

  const QuadratureRule rule = detail::kx_rule(g, q);
  detail::check_windings(g, rule, p, q, series);
  const std::size_t n = rule.nodes.size();
  std::vector<detail::KernelNode> nodes(n);
  std::vector<cplx> amp(n);
  std::vector<double> omega(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = rule.nodes[i];
    nodes[i] = detail::kernel_node(solve_1d(p, k));
    amp[i] = rule.weights[i] * g.momentum_amplitude(k);
    omega[i] = 0.5 * p.hbar_over_mass() * k * k;
  }
  const std::vector<cplx> kernel = detail::build_kernel(nodes);
  const double prefactor = p.decay / (2.0 * std::numbers::pi);

  detail::parallel_for(nt, q.threads, [&](std::size_t it) {
    std::vector<cplx> u(n);
    raw[it] = prefactor * detail::quadratic_form(kernel, amp, omega, q.times[it], u);
  });
  detail::finish_series(series, raw);
  return series;
}

/// Pi(t) of the 2D model. Solver calls are made once per (k_x, k_y) node; the
/// k_x x k_x' kernel of each k_y slice is reused for every time sample.
/// Slices are reduced in a fixed order, so the result is bitwise independent
/// of q.threads.
inline ToaSeries pi_2d(const PhysParams& p, const GaussianPacket2D& g, const QuadratureSpec& q) {
  p.validate();
  g.validate();
  q.validate();
  detail::check_truncation(g.x_marginal(), q);

  ToaSeries series;
  series.times = q.times;
  const std::size_t nt = q.times.size();
  std::vector<cplx> raw(nt, 0.0);
  if (p.decay == 0.0 || p.rabi == 0.0) {
    detail::finish_series(series, raw);
    return series;
  }

  const QuadratureRule xr = detail::kx_rule(g.x_marginal(), q);
  detail::check_windings(g.x_marginal(), xr, p, q, series);
  const double sy = g.sigma_ky();
  const QuadratureRule yr =
      gauss_legendre(q.n_ky, g.ky0 - q.span_sigmas * sy, g.ky0 + q.span_sigmas * sy);
  const std::size_t nx = xr.nodes.size();
  const std::size_t ny = yr.nodes.size();

  std::vector<double> omega(nx);
  for (std::size_t i = 0; i < nx; ++i) omega[i] = 0.5 * p.hbar_over_mass() * xr.nodes[i] * xr.nodes[i];

  std::vector<std::vector<cplx>> slice_values(ny);
  detail::parallel_for(ny, q.threads, [&](std::size_t j) {
    const double ky = yr.nodes[j];
    const double delta = effective_detuning(p, ky);
    std::vector<detail::KernelNode> nodes(nx);
    std::vector<cplx> amp(nx);
    for (std::size_t i = 0; i < nx; ++i) {
      nodes[i] = detail::kernel_node(solve_2d_at_detuning(p, xr.nodes[i], ky, delta));
      amp[i] = xr.weights[i] * g.momentum_amplitude(xr.nodes[i], ky);
    }
    const std::vector<cplx> kernel = detail::build_kernel(nodes);
    std::vector<cplx> u(nx);
    std::vector<cplx>& out = slice_values[j];
    out.resize(nt);
    for (std::size_t it = 0; it < nt; ++it) {
      out[it] = yr.weights[j] * detail::quadratic_form(kernel, amp, omega, q.times[it], u);
    }
  });

  const double prefactor = p.decay / (2.0 * std::numbers::pi);
  for (std::size_t it = 0; it < nt; ++it) {
    cplx acc = 0.0;
    for (std::size_t j = 0; j < ny; ++j) acc += slice_values[j][it];
    raw[it] = prefactor * acc;
  }
  detail::finish_series(series, raw);
  return series;
}

/// Total emission probability: cumulative integral plus an exponential tail
/// fitted to the last two samples.
struct EmissionTotal {
  double total = 0.0;
  double tail = 0.0;
  /// Tail estimate exceeds 1% of the total: the series was cut too early.
  bool tail_warning = false;
};

inline EmissionTotal emission_total(const ToaSeries& s) {
  EmissionTotal e;
  const std::size_t n = s.pi_values.size();
  if (n == 0) return e;
  ToaSeries copy;
  const std::vector<double>* cumulative = &s.cumulative;
  if (s.cumulative.size() != n) {
    copy = s;
    copy.update_cumulative();
    cumulative = &copy.cumulative;
  }
  const double body = cumulative->back();
  if (n >= 2) {
    const double a = s.pi_values[n - 2], b = s.pi_values[n - 1];
    const double h = s.times[n - 1] - s.times[n - 2];
    double peak = 0.0;
    for (double v : s.pi_values) peak = std::max(peak, std::abs(v));
    if (std::abs(b) <= 1e-10 * peak) {
      // Already decayed to rounding level.
    } else if (b > 0.0 && a > b) {
      const double rate = std::log(a / b) / h;
      e.tail = b / rate;
    } else if (b > 0.0) {
      // Not decaying: no defensible extrapolation.
      e.tail = 0.0;
      e.tail_warning = true;
    }
  }
  e.total = std::clamp(body + e.tail, 0.0, 1.0);
  if (e.tail > 0.01 * e.total) e.tail_warning = true;
  return e;
}

}  // namespace toa
