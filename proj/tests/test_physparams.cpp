#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "toa/physparams.hpp"

using namespace toa;

TEST(PhysParams, RecoilShiftMatchesRecoilVelocity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> kl(0.0, 2e7), m(1e-27, 1e-24);
  for (int i = 0; i < 100; ++i) {
    PhysParams p;
    p.mass = m(rng);
    p.laser_wavenumber = kl(rng);
    EXPECT_NEAR(p.recoil_shift(), 0.5 * p.laser_wavenumber * p.recoil_velocity(),
                1e-15 * p.recoil_shift());
  }
}

TEST(PhysParams, KineticDetuningSpecialPoints) {
  const PhysParams p = cesium_d2(1.67e8, 3.3e8);
  const auto at_rest = kinetic_detuning(p, 0.0);
  EXPECT_EQ(at_rest.doppler, 0.0);
  EXPECT_EQ(at_rest.total, p.recoil_shift());
  const auto cancel = kinetic_detuning(p, -0.5 * p.laser_wavenumber);
  EXPECT_NEAR(cancel.total, 0.0, 1e-12 * p.recoil_shift());
  EXPECT_NEAR(effective_detuning(p, -0.5 * p.laser_wavenumber), 0.0, 1e-12 * p.recoil_shift());
}

TEST(PhysParams, CesiumRecoilShift) {
  const PhysParams p = cesium_d2(1.67e8, 3.3e8);
  const long double hbar = 1.054571817e-34L, k = 7.37e6L, m = 2.2069e-25L;
  const long double expected = hbar * k * k / (2.0L * m);
  EXPECT_NEAR(p.recoil_shift(), static_cast<double>(expected), 1e-13 * static_cast<double>(expected));
  EXPECT_NEAR(p.recoil_shift(), 1.30e4, 0.01 * 1.30e4);
}

TEST(PhysParams, DetuningDecomposition) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PhysParams p = cesium_d2(1e8, 3e8, 0.0);
  for (int i = 0; i < 200; ++i) {
    p.laser_detuning = 1e9 * u(rng);
    const double ky = 1e10 * u(rng);
    const auto kd = kinetic_detuning(p, ky);
    EXPECT_EQ(kd.total, kd.doppler + kd.recoil);
    EXPECT_NEAR(effective_detuning(p, ky) + kd.total, p.laser_detuning,
                4e-16 * (std::abs(p.laser_detuning) + std::abs(kd.total)));
  }
  p.laser_detuning = 10.0 * p.recoil_shift();
  EXPECT_NEAR(effective_detuning(p, 0.0), 9.0 * p.recoil_shift(), 1e-12 * p.recoil_shift());
}

TEST(PhysParams, KineticDetuningIsAffineInKy) {
  const PhysParams p = cesium_d2(1e8, 3e8);
  const double slope = p.hbar_over_mass() * p.laser_wavenumber;
  for (double ky : {-3e9, 0.0, 5e8}) {
    const double h = 1e6;
    const double fd = (kinetic_detuning(p, ky + h).total - kinetic_detuning(p, ky - h).total) / (2 * h);
    EXPECT_NEAR(fd, slope, 1e-6 * slope);
  }
}

TEST(PhysParams, NoLaserMomentumMeansNoKineticDetuning) {
  PhysParams p = cesium_d2(1e8, 3e8);
  p.laser_wavenumber = 0.0;
  for (double ky : {-1e10, 0.0, 3e9}) EXPECT_EQ(kinetic_detuning(p, ky).total, 0.0);
}

TEST(PhysParams, ValidationRejectsBadFields) {
  PhysParams p = cesium_d2(1e8, 3e8);
  EXPECT_NO_THROW(p.validate());
  auto bad = [&](auto mutate) {
    PhysParams q = p;
    mutate(q);
    EXPECT_THROW(q.validate(), ParameterError);
  };
  bad([](PhysParams& q) { q.mass = 0.0; });
  bad([](PhysParams& q) { q.rabi = -1.0; });
  bad([](PhysParams& q) { q.decay = -1.0; });
  bad([](PhysParams& q) { q.laser_wavenumber = -1.0; });
  bad([](PhysParams& q) { q.laser_detuning = NAN; });
}
