#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "toa/errors.hpp"

namespace toa {

/// Minimum-uncertainty Gaussian along one axis, prepared at t = 0.
struct GaussianPacket1D {
  double x0 = 0.0;  // mean position, m
  double dx = 0.0;  // position standard deviation, m
  double k0 = 0.0;  // mean wavenumber, m^-1

  void validate() const {
    if (!std::isfinite(x0) || !std::isfinite(dx) || !std::isfinite(k0)) {
      throw ParameterError("GaussianPacket1D: non-finite field");
    }
    if (!(dx > 0.0)) throw ParameterError("GaussianPacket1D: width must be > 0");
  }

  /// Momentum standard deviation, dx * sigma_k = 1/2.
  double sigma_k() const { return 0.5 / dx; }

  /// psi~(k) = (2 dx^2/pi)^{1/4} exp(-(k - k0)^2 dx^2 - i k x0)
  std::complex<double> momentum_amplitude(double k) const {
    const double norm = std::pow(2.0 * dx * dx / std::numbers::pi, 0.25);
    const double u = (k - k0) * dx;
    return norm * std::exp(-u * u) * std::polar(1.0, -k * x0);
  }

  /// Freely evolved position amplitude psi(x, t) for hbar/m = hbar_over_mass.
  std::complex<double> position_amplitude(double x, double t, double hbar_over_mass) const {
    const std::complex<double> i(0.0, 1.0);
    const double beta = 0.5 * hbar_over_mass * t;
    const std::complex<double> a(dx * dx, beta);
    const double shift = x - x0;
    const double drift = shift - hbar_over_mass * k0 * t;
    const double norm = std::pow(2.0 * dx * dx / std::numbers::pi, 0.25) /
                        std::sqrt(2.0 * std::numbers::pi);
    return norm * std::sqrt(std::numbers::pi / a) *
           std::exp(-drift * drift / (4.0 * a) + i * (k0 * shift - beta * k0 * k0));
  }

  /// d psi / dx of the freely evolved packet.
  std::complex<double> position_derivative(double x, double t, double hbar_over_mass) const {
    const std::complex<double> i(0.0, 1.0);
    const std::complex<double> a(dx * dx, 0.5 * hbar_over_mass * t);
    const double drift = x - x0 - hbar_over_mass * k0 * t;
    return position_amplitude(x, t, hbar_over_mass) * (-drift / (2.0 * a) + i * k0);
  }

  /// Probability carried by k < 0 components.
  double negative_k_mass() const { return 0.5 * std::erfc(std::numbers::sqrt2 * dx * k0); }
};

/// Product Gaussian psi~(k_x, k_y) = psi~_x(k_x) psi~_y(k_y).
struct GaussianPacket2D {
  double x0 = 0.0, y0 = 0.0;
  double dx = 0.0, dy = 0.0;
  double kx0 = 0.0, ky0 = 0.0;

  GaussianPacket1D x_marginal() const { return {x0, dx, kx0}; }
  GaussianPacket1D y_marginal() const { return {y0, dy, ky0}; }

  void validate() const {
    x_marginal().validate();
    y_marginal().validate();
  }

  double sigma_kx() const { return 0.5 / dx; }
  double sigma_ky() const { return 0.5 / dy; }

  std::complex<double> momentum_amplitude(double k_x, double k_y) const {
    return x_marginal().momentum_amplitude(k_x) * y_marginal().momentum_amplitude(k_y);
  }

  std::complex<double> position_amplitude(double x, double y, double t,
                                          double hbar_over_mass) const {
    return x_marginal().position_amplitude(x, t, hbar_over_mass) *
           y_marginal().position_amplitude(y, t, hbar_over_mass);
  }

  /// Mass outside the k_x > 0 domain of the eigenfunction expansion.
  double negative_k_mass() const { return x_marginal().negative_k_mass(); }
};

/// Half-line truncation tolerated before a run is refused.
inline constexpr double kNegativeMassThreshold = 1e-6;

}  // namespace toa
