#pragma once

#include <cmath>
#include <string>

#include "toa/errors.hpp"

namespace toa {

/// Reduced Planck constant, CODATA 2018 (J s).
inline constexpr double kHbar = 1.054571817e-34;

/// Atom and laser constants, SI units throughout.
///
/// Rates (rabi, decay, laser_detuning) are angular frequencies in s^-1. The
/// laser propagates along +y and illuminates the half plane x >= 0.
struct PhysParams {
  double mass = 0.0;              // kg
  double rabi = 0.0;              // Omega
  double decay = 0.0;             // gamma, Einstein coefficient of |2>
  double laser_detuning = 0.0;    // Delta_L = omega_laser - omega_atom
  double laser_wavenumber = 0.0;  // k_L, m^-1

  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(mass) || !finite(rabi) || !finite(decay) || !finite(laser_detuning) ||
        !finite(laser_wavenumber)) {
      throw ParameterError("PhysParams: non-finite field");
    }
    if (!(mass > 0.0)) throw ParameterError("PhysParams: mass must be > 0");
    if (rabi < 0.0) throw ParameterError("PhysParams: rabi must be >= 0");
    if (decay < 0.0) throw ParameterError("PhysParams: decay must be >= 0");
    if (laser_wavenumber < 0.0) throw ParameterError("PhysParams: laser_wavenumber must be >= 0");
  }

  double hbar_over_mass() const { return kHbar / mass; }
  /// 2m/hbar, the factor converting frequencies into squared wavenumbers.
  double two_mass_over_hbar() const { return 2.0 * mass / kHbar; }
  /// v_R = hbar k_L / m
  double recoil_velocity() const { return hbar_over_mass() * laser_wavenumber; }
  /// omega_R = hbar k_L^2 / 2m
  double recoil_shift() const {
    return 0.5 * hbar_over_mass() * laser_wavenumber * laser_wavenumber;
  }
};

/// Doppler plus recoil shift seen by a plane-wave component with transverse
/// wavenumber k_y. total == doppler + recoil exactly.
struct KineticDetuning {
  double total = 0.0;
  double doppler = 0.0;
  double recoil = 0.0;
};

inline KineticDetuning kinetic_detuning(const PhysParams& p, double k_y) {
  KineticDetuning kd;
  kd.doppler = p.hbar_over_mass() * k_y * p.laser_wavenumber;
  kd.recoil = p.recoil_shift();
  kd.total = kd.doppler + kd.recoil;
  return kd;
}

/// Delta = Delta_L - Delta_K(k_y); the only place k_y enters the 2D branches.
inline double effective_detuning(const PhysParams& p, double k_y) {
  return p.laser_detuning - kinetic_detuning(p, k_y).total;
}

/// Cesium D2 line: mass and laser wavenumber 2 pi / 852.35 nm.
inline PhysParams cesium_d2(double rabi, double decay, double laser_detuning = 0.0) {
  PhysParams p;
  p.mass = 2.2069e-25;
  p.rabi = rabi;
  p.decay = decay;
  p.laser_detuning = laser_detuning;
  p.laser_wavenumber = 7.37e6;
  return p;
}

}  // namespace toa
