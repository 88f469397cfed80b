#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "toa/packet.hpp"
#include "toa/physparams.hpp"
#include "toa/quadrature.hpp"

using namespace toa;

namespace {

const GaussianPacket2D kPacket{-1.32e-6, 0.4e-6, 0.24e-6, 0.5e-6, 1.88e8, -3e6};

double box_mass(const GaussianPacket2D& g, double span, int n) {
  const auto rx = gauss_legendre(n, g.kx0 - span * g.sigma_kx(), g.kx0 + span * g.sigma_kx());
  const auto ry = gauss_legendre(n, g.ky0 - span * g.sigma_ky(), g.ky0 + span * g.sigma_ky());
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      acc += rx.weights[i] * ry.weights[j] * std::norm(g.momentum_amplitude(rx.nodes[i], ry.nodes[j]));
    }
  }
  return acc;
}

// psi(x, t) by direct quadrature of the momentum representation.
std::complex<double> synthesize(const GaussianPacket1D& g, double x, double t, double hm) {
  const auto r = gauss_legendre(160, g.k0 - 10 * g.sigma_k(), g.k0 + 10 * g.sigma_k());
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const double k = r.nodes[i];
    acc += r.weights[i] * g.momentum_amplitude(k) * std::polar(1.0, k * x - 0.5 * hm * k * k * t);
  }
  return acc / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

TEST(Packet, PeakAndSymmetry) {
  const GaussianPacket2D& g = kPacket;
  const double n = std::pow(2.0 * g.dx * g.dx / std::numbers::pi, 0.25) *
                   std::pow(2.0 * g.dy * g.dy / std::numbers::pi, 0.25);
  EXPECT_NEAR(std::abs(g.momentum_amplitude(g.kx0, g.ky0)), n, 1e-14 * n);
  for (double d : {1e5, 2e6, 7e6}) {
    EXPECT_NEAR(std::abs(g.momentum_amplitude(g.kx0 + d, g.ky0)),
                std::abs(g.momentum_amplitude(g.kx0 - d, g.ky0)), 1e-14 * n);
  }
  EXPECT_DOUBLE_EQ(g.dx * g.sigma_kx(), 0.5);
  EXPECT_DOUBLE_EQ(g.dy * g.sigma_ky(), 0.5);
}

TEST(Packet, NormalizationOnQuadratureBox) {
  const double inside = std::pow(std::erf(6.0 / std::numbers::sqrt2), 2);
  EXPECT_NEAR(box_mass(kPacket, 6.0, 64), inside, 1e-10);
  EXPECT_NEAR(box_mass(kPacket, 8.0, 80), 1.0, 1e-10);
}

TEST(Packet, NegativeMomentumMass) {
  GaussianPacket1D g{0.0, 1e-6, 0.0};
  EXPECT_DOUBLE_EQ(g.negative_k_mass(), 0.5);
  g.k0 = 3.0 / g.dx;
  const auto r = gauss_legendre(200, g.k0 - 14 * g.sigma_k(), 0.0);
  double direct = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) direct += r.weights[i] * std::norm(g.momentum_amplitude(r.nodes[i]));
  EXPECT_NEAR(g.negative_k_mass(), direct, 1e-8 * direct);
  EXPECT_NEAR(g.negative_k_mass(), 0.5 * std::erfc(3.0 * std::numbers::sqrt2), 1e-30);
  g.k0 = 50.0 / g.dx;
  EXPECT_EQ(g.negative_k_mass(), 0.0);
}

TEST(Packet, ParsevalOnPositionGrid) {
  const double hm = kHbar / 2.2069e-25;
  for (const auto& g : {kPacket.x_marginal(), kPacket.y_marginal()}) {
    const int n = 801;
    const double a = g.x0 - 10 * g.dx, b = g.x0 + 10 * g.dx, h = (b - a) / (n - 1);
    double closed = 0.0, synth = 0.0, gap = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = a + i * h;
      const double w = (i == 0 || i == n - 1) ? 0.5 * h : h;
      const auto c = g.position_amplitude(x, 0.0, hm);
      const auto s = synthesize(g, x, 0.0, hm);
      closed += w * std::norm(c);
      synth += w * std::norm(s);
      gap = std::max(gap, std::abs(c - s));
    }
    EXPECT_NEAR(closed, 1.0, 1e-8);
    EXPECT_NEAR(synth, 1.0, 1e-8);
    EXPECT_LT(gap, 1e-8 * std::abs(g.position_amplitude(g.x0, 0.0, hm)));
  }
}

TEST(Packet, FreeEvolutionMovesCentroid) {
  const double hm = kHbar / 2.2069e-25;
  const GaussianPacket1D g = kPacket.x_marginal();
  for (double t : {0.0, 2e-6, 1e-5}) {
    const double center = g.x0 + hm * g.k0 * t;
    const double spread = g.dx * std::sqrt(1.0 + std::pow(hm * t / (2 * g.dx * g.dx), 2));
    const int n = 1201;
    const double a = center - 12 * spread, b = center + 12 * spread, h = (b - a) / (n - 1);
    double norm = 0.0, first = 0.0, gap = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = a + i * h;
      const double w = (i == 0 || i == n - 1) ? 0.5 * h : h;
      const auto c = g.position_amplitude(x, t, hm);
      norm += w * std::norm(c);
      first += w * x * std::norm(c);
      if (i % 40 == 0) gap = std::max(gap, std::abs(c - synthesize(g, x, t, hm)));
    }
    EXPECT_NEAR(norm, 1.0, 1e-9);
    EXPECT_NEAR(first / norm, center, 1e-6 * spread);
    EXPECT_LT(gap, 1e-7 * std::abs(g.position_amplitude(center, t, hm)));
  }
}

TEST(Packet, DerivativeMatchesFiniteDifference) {
  const double hm = kHbar / 2.2069e-25;
  const GaussianPacket1D g = kPacket.x_marginal();
  for (double x : {-2e-6, -1.3e-6, 0.0, 4e-7}) {
    const double h = 1e-12;
    const auto fd = (g.position_amplitude(x + h, 3e-6, hm) - g.position_amplitude(x - h, 3e-6, hm)) / (2 * h);
    const auto an = g.position_derivative(x, 3e-6, hm);
    EXPECT_LT(std::abs(fd - an), 1e-6 * std::abs(an) + 1e-3);
  }
}

TEST(Packet, ValidationRejectsZeroWidth) {
  GaussianPacket2D g = kPacket;
  g.dx = 0.0;
  EXPECT_THROW(g.validate(), ParameterError);
  g = kPacket;
  g.dy = -1.0;
  EXPECT_THROW(g.validate(), ParameterError);
  g = kPacket;
  g.kx0 = NAN;
  EXPECT_THROW(g.validate(), ParameterError);
}
