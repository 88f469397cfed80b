#pragma once

// Detection-delay removal: the first-photon density W(t) of an atom at rest,
// Wiener deconvolution of Pi = Pi_id * W, and the free x-flux through x = 0
// that Pi_id approaches for large decay rates.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "toa/detail/two_level.hpp"
#include "toa/errors.hpp"
#include "toa/packet.hpp"
#include "toa/physparams.hpp"
#include "toa/toa.hpp"

namespace toa {

struct AtRestDistribution {
  double rabi = 0.0;
  double decay = 0.0;
  double detuning = 0.0;
  std::vector<double> times;
  std::vector<double> values;
};

/// W(t) = gamma |b(t)|^2 for the 0D conditional two-level system started in
/// the ground state, via the exact 2x2 exponential at every sample.
inline AtRestDistribution w_at_rest(const PhysParams& p, const std::vector<double>& times) {
  p.validate();
  if (!(p.decay > 0.0)) throw ParameterError("w_at_rest: decay must be > 0");
  AtRestDistribution w{p.rabi, p.decay, p.laser_detuning, times, {}};
  const detail::Mat2 gen = detail::two_level_generator(p.rabi, p.decay, p.laser_detuning, true);
  w.values.reserve(times.size());
  for (double t : times) {
    const detail::Mat2 u = detail::expm2(detail::scale(gen, t));
    w.values.push_back(p.decay * std::norm(u[2]));
  }
  return w;
}

struct FluxSeries {
  std::vector<double> times;
  std::vector<double> values;
};

/// y-integrated x-flux through x = 0 of the freely moving packet. For a
/// product Gaussian the normalized y factor integrates out, leaving the 1D
/// flux (hbar/m) Im(conj(psi) d_x psi) of the x-marginal.
inline FluxSeries flux_xline(const GaussianPacket2D& g, double mass, const std::vector<double>& times) {
  g.validate();
  if (!(mass > 0.0)) throw ParameterError("flux_xline: mass must be > 0");
  const double hm = kHbar / mass;
  const GaussianPacket1D gx = g.x_marginal();
  FluxSeries f{times, {}};
  f.values.reserve(times.size());
  for (double t : times) {
    const auto psi = gx.position_amplitude(0.0, t, hm);
    const auto dpsi = gx.position_derivative(0.0, t, hm);
    f.values.push_back(hm * std::imag(std::conj(psi) * dpsi));
  }
  return f;
}

namespace detail {

inline double uniform_step(const std::vector<double>& t, const char* what) {
  if (t.size() < 2) throw ParameterError(std::string(what) + ": need at least two samples");
  const double dt = t[1] - t[0];
  if (!(dt > 0.0)) throw ParameterError(std::string(what) + ": times must increase");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs((t[i] - t[i - 1]) - dt) > 1e-9 * dt) {
      throw ParameterError(std::string(what) + ": time grid is not uniform");
    }
  }
  return dt;
}

inline void check_commensurate(const std::vector<double>& a, const std::vector<double>& b) {
  const double dt = uniform_step(a, "deconvolve");
  uniform_step(b, "deconvolve");
  if (a.size() != b.size()) throw ParameterError("deconvolve: grids differ in length");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > 1e-9 * dt) throw ParameterError("deconvolve: time grids differ");
  }
}

class Fft1d {
 public:
  explicit Fft1d(int n) : n_(n) {
    buf_ = fftw_alloc_complex(n);
    fwd_ = fftw_plan_dft_1d(n, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(n, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  Fft1d(const Fft1d&) = delete;
  Fft1d& operator=(const Fft1d&) = delete;
  ~Fft1d() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }

  std::vector<std::complex<double>> forward(const std::vector<double>& x) {
    for (int i = 0; i < n_; ++i) {
      buf_[i][0] = i < static_cast<int>(x.size()) ? x[i] : 0.0;
      buf_[i][1] = 0.0;
    }
    fftw_execute(fwd_);
    return copy_out();
  }

  std::vector<std::complex<double>> backward(const std::vector<std::complex<double>>& x) {
    for (int i = 0; i < n_; ++i) {
      buf_[i][0] = x[i].real();
      buf_[i][1] = x[i].imag();
    }
    fftw_execute(bwd_);
    auto out = copy_out();
    for (auto& v : out) v /= static_cast<double>(n_);
    return out;
  }

 private:
  std::vector<std::complex<double>> copy_out() const {
    std::vector<std::complex<double>> out(n_);
    for (int i = 0; i < n_; ++i) out[i] = {buf_[i][0], buf_[i][1]};
    return out;
  }

  int n_;
  fftw_complex* buf_;
  fftw_plan fwd_, bwd_;
};

}  // namespace detail

/// Discrete causal convolution (Pi_id * W)(t_n) = dt sum_{m<=n} Pi_id(t_m) W(t_n - t_m).
inline ToaSeries convolve(const ToaSeries& ideal, const AtRestDistribution& w) {
  detail::check_commensurate(ideal.times, w.times);
  const double dt = ideal.times[1] - ideal.times[0];
  const std::size_t n = ideal.times.size();
  ToaSeries out;
  out.times = ideal.times;
  out.pi_values.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t m = 0; m <= i; ++m) acc += ideal.pi_values[m] * w.values[i - m];
    out.pi_values[i] = dt * acc;
  }
  out.update_cumulative();
  return out;
}

inline constexpr double kDefaultWienerEpsilon = 1e-4;

/// Pi_id from Pi = Pi_id * W by Wiener-regularized division in the Fourier
/// domain (zero padded to twice the length, so the circular product equals the
/// causal convolution above):
///   Pi_id^ = Pi^ conj(W^) / (|W^|^2 + epsilon max|W^|^2).
/// The output is not renormalized.
inline ToaSeries deconvolve(const ToaSeries& pi, const AtRestDistribution& w,
                            double epsilon = kDefaultWienerEpsilon) {
  if (!(epsilon > 0.0)) throw ParameterError("deconvolve: epsilon must be > 0");
  detail::check_commensurate(pi.times, w.times);
  const double dt = pi.times[1] - pi.times[0];
  const std::size_t n = pi.times.size();
  detail::Fft1d fft(static_cast<int>(2 * n));
  auto pi_hat = fft.forward(pi.pi_values);
  auto w_hat = fft.forward(w.values);
  double peak = 0.0;
  for (auto& v : w_hat) {
    v *= dt;
    peak = std::max(peak, std::norm(v));
  }
  if (!(peak > 0.0)) throw ParameterError("deconvolve: W vanishes identically");
  for (std::size_t i = 0; i < pi_hat.size(); ++i) {
    pi_hat[i] = pi_hat[i] * std::conj(w_hat[i]) / (std::norm(w_hat[i]) + epsilon * peak);
  }
  const auto ideal = fft.backward(pi_hat);
  ToaSeries out;
  out.times = pi.times;
  out.pi_values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.pi_values[i] = ideal[i].real();
  out.update_cumulative();
  out.metadata = {{"epsilon", epsilon}, {"dt", dt}};
  return out;
}

/// Same L1 measure as relative_l1_distance, against a flux series.
inline double relative_l1_distance(const ToaSeries& a, const FluxSeries& b) {
  ToaSeries tb;
  tb.times = b.times;
  tb.pi_values = b.values;
  return relative_l1_distance(a, tb);
}

}  // namespace toa
