#pragma once

// Direct time-domain propagation of the two-component wave function under the
// conditional Hamiltonian on a periodic (x, y) grid, Strang split into an
// exact pointwise 2x2 potential exponential and an exact kinetic step in
// Fourier space. Independent of the eigenfunction expansion in toa.hpp.

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "toa/detail/two_level.hpp"
#include "toa/errors.hpp"
#include "toa/packet.hpp"
#include "toa/physparams.hpp"
#include "toa/toa.hpp"

namespace toa {

struct GridSpec {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  int nx = 0, ny = 0;
  double dt = 0.0;
  int n_steps = 0;
  /// Snapshot/record stride in steps for the output series.
  int record_every = 1;

  double dx() const { return (x_max - x_min) / nx; }
  double dy() const { return (y_max - y_min) / ny; }
  double cell_area() const { return dx() * dy(); }
  double x(int i) const { return x_min + i * dx(); }
  double y(int j) const { return y_min + j * dy(); }
  /// Index of the grid line x = 0.
  int edge_index() const { return static_cast<int>(std::lround(-x_min / dx())); }

  void validate() const {
    auto pow2 = [](int n) { return n > 0 && std::has_single_bit(static_cast<unsigned>(n)); };
    if (!pow2(nx) || !pow2(ny)) throw ParameterError("GridSpec: nx, ny must be powers of two");
    if (!(x_min < 0.0 && x_max > 0.0)) throw ParameterError("GridSpec: need x_min < 0 < x_max");
    if (!(y_max > y_min)) throw ParameterError("GridSpec: need y_max > y_min");
    if (!(dt > 0.0) || n_steps < 1 || record_every < 1) {
      throw ParameterError("GridSpec: dt > 0, n_steps >= 1, record_every >= 1 required");
    }
    const double cells = -x_min / dx();
    if (std::abs(cells - std::round(cells)) > 1e-9 * std::max(1.0, cells)) {
      throw ParameterError("GridSpec: x = 0 must fall on a grid line");
    }
  }
};

/// Default step: 0.02 over the fastest rate among gamma, Omega, |Delta_L| and
/// the kinetic frequency of the largest wavenumber carried by the packet.
inline double default_time_step(const PhysParams& p, const GaussianPacket2D& g) {
  const double kx = std::abs(g.kx0) + 6.0 * g.sigma_kx();
  const double ky = std::abs(g.ky0) + 6.0 * g.sigma_ky() + p.laser_wavenumber;
  const double kinetic = 0.5 * p.hbar_over_mass() * (kx * kx + ky * ky);
  const double fastest = std::max({p.decay, p.rabi, std::abs(p.laser_detuning), kinetic});
  return 0.02 / fastest;
}

/// Throws if the grid cannot represent the packet's wavenumbers, including the
/// k_L shift carried by the excited component.
inline void check_resolution(const GridSpec& s, const PhysParams& p, const GaussianPacket2D& g) {
  const double kx_need = std::abs(g.kx0) + 6.0 * g.sigma_kx();
  const double ky_need = std::abs(g.ky0) + 6.0 * g.sigma_ky() + p.laser_wavenumber;
  if (!(s.dx() < std::numbers::pi / kx_need)) {
    throw NumericalGuardError("GridSpec: x spacing does not resolve the packet wavenumbers");
  }
  if (s.ny > 1 && !(s.dy() < std::numbers::pi / ky_need)) {
    throw NumericalGuardError("GridSpec: y spacing does not resolve k_y + k_L");
  }
}

/// Two-component wave function on the grid, index ix * ny + iy.
struct GridState {
  std::vector<std::complex<double>> ground;
  std::vector<std::complex<double>> excited;
  double time = 0.0;

  double norm(double cell_area) const {
    double acc = 0.0;
    for (const auto& v : ground) acc += std::norm(v);
    for (const auto& v : excited) acc += std::norm(v);
    return acc * cell_area;
  }
  double excited_norm(double cell_area) const {
    double acc = 0.0;
    for (const auto& v : excited) acc += std::norm(v);
    return acc * cell_area;
  }
};

/// Ground-state Gaussian sampled on the grid at t = 0.
inline GridState initial_state(const GaussianPacket2D& g, const PhysParams& p, const GridSpec& s) {
  GridState st;
  const std::size_t n = static_cast<std::size_t>(s.nx) * s.ny;
  st.ground.resize(n);
  st.excited.assign(n, 0.0);
  const double hm = p.hbar_over_mass();
  const auto gx = g.x_marginal();
  const auto gy = g.y_marginal();
  std::vector<std::complex<double>> fy(s.ny);
  for (int j = 0; j < s.ny; ++j) fy[j] = gy.position_amplitude(s.y(j), 0.0, hm);
  for (int i = 0; i < s.nx; ++i) {
    const auto fx = gx.position_amplitude(s.x(i), 0.0, hm);
    for (int j = 0; j < s.ny; ++j) st.ground[static_cast<std::size_t>(i) * s.ny + j] = fx * fy[j];
  }
  return st;
}

class SplitStepPropagator {
 public:
  SplitStepPropagator(const PhysParams& p, const GridSpec& spec) : params_(p), spec_(spec) {
    p.validate();
    spec.validate();
    n_ = static_cast<std::size_t>(spec.nx) * spec.ny;
    ground_ = fftw_alloc_complex(n_);
    excited_ = fftw_alloc_complex(n_);
    std::memset(ground_, 0, sizeof(fftw_complex) * n_);
    std::memset(excited_, 0, sizeof(fftw_complex) * n_);
    fwd_g_ = fftw_plan_dft_2d(spec.nx, spec.ny, ground_, ground_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_g_ = fftw_plan_dft_2d(spec.nx, spec.ny, ground_, ground_, FFTW_BACKWARD, FFTW_ESTIMATE);
    fwd_e_ = fftw_plan_dft_2d(spec.nx, spec.ny, excited_, excited_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_e_ = fftw_plan_dft_2d(spec.nx, spec.ny, excited_, excited_, FFTW_BACKWARD, FFTW_ESTIMATE);

    // Kinetic propagator exp(-i hbar k^2 dt / 2m), with the 1/N of the
    // unnormalized inverse transform folded in.
    kinetic_.resize(n_);
    const double lx = spec.x_max - spec.x_min;
    const double ly = spec.y_max - spec.y_min;
    const double inv_n = 1.0 / static_cast<double>(n_);
    auto wavenumber = [](int i, int n, double length) {
      const int m = i < n / 2 ? i : i - n;
      return 2.0 * std::numbers::pi * m / length;
    };
    for (int i = 0; i < spec.nx; ++i) {
      const double kx = wavenumber(i, spec.nx, lx);
      for (int j = 0; j < spec.ny; ++j) {
        const double ky = wavenumber(j, spec.ny, ly);
        const double w = 0.5 * p.hbar_over_mass() * (kx * kx + ky * ky);
        kinetic_[static_cast<std::size_t>(i) * spec.ny + j] = std::polar(inv_n, -w * spec.dt);
      }
    }
    lit_ = detail::expm2(detail::scale(
        detail::two_level_generator(p.rabi, p.decay, p.laser_detuning, true), 0.5 * spec.dt));
    edge_ = detail::expm2(detail::scale(
        detail::two_level_generator(0.5 * p.rabi, p.decay, p.laser_detuning, true), 0.5 * spec.dt));
    dark_ = detail::expm2(detail::scale(
        detail::two_level_generator(p.rabi, p.decay, p.laser_detuning, false), 0.5 * spec.dt));
    laser_phase_.resize(spec.ny);
    for (int j = 0; j < spec.ny; ++j) {
      laser_phase_[j] = std::polar(1.0, p.laser_wavenumber * spec.y(j));
    }
  }

  SplitStepPropagator(const SplitStepPropagator&) = delete;
  SplitStepPropagator& operator=(const SplitStepPropagator&) = delete;

  ~SplitStepPropagator() {
    fftw_destroy_plan(fwd_g_);
    fftw_destroy_plan(bwd_g_);
    fftw_destroy_plan(fwd_e_);
    fftw_destroy_plan(bwd_e_);
    fftw_free(ground_);
    fftw_free(excited_);
  }

  void load(const GridState& s) {
    if (s.ground.size() != n_ || s.excited.size() != n_) {
      throw ParameterError("GridState does not match the grid");
    }
    std::memcpy(ground_, s.ground.data(), sizeof(fftw_complex) * n_);
    std::memcpy(excited_, s.excited.data(), sizeof(fftw_complex) * n_);
    time_ = s.time;
    last_norm_ = norm();
  }

  GridState snapshot() const {
    GridState s;
    s.ground.assign(as_complex(ground_), as_complex(ground_) + n_);
    s.excited.assign(as_complex(excited_), as_complex(excited_) + n_);
    s.time = time_;
    return s;
  }

  /// Advances by dt. Throws NumericalGuardError if the norm grows.
  void step() {
    half_potential();
    fftw_execute(fwd_g_);
    fftw_execute(fwd_e_);
    auto* g = as_complex(ground_);
    auto* e = as_complex(excited_);
    for (std::size_t i = 0; i < n_; ++i) {
      g[i] *= kinetic_[i];
      e[i] *= kinetic_[i];
    }
    fftw_execute(bwd_g_);
    fftw_execute(bwd_e_);
    half_potential();
    time_ += spec_.dt;

    const double now = norm();
    if (now > last_norm_ * (1.0 + 1e-12) + 1e-300) {
      throw NumericalGuardError("split-step norm increased at t = " + std::to_string(time_));
    }
    last_norm_ = now;
  }

  double time() const { return time_; }
  double norm() const { return sum_norm(ground_) + excited_norm(); }
  double excited_norm() const { return sum_norm(excited_); }

  /// Largest |psi|^2 on the outermost x columns (and y rows when ny > 1)
  /// relative to the largest |psi|^2 anywhere.
  double boundary_ratio() const {
    const auto* g = as_complex(ground_);
    const auto* e = as_complex(excited_);
    double peak = 0.0, edge = 0.0;
    for (int i = 0; i < spec_.nx; ++i) {
      for (int j = 0; j < spec_.ny; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * spec_.ny + j;
        const double d = std::norm(g[k]) + std::norm(e[k]);
        peak = std::max(peak, d);
        const bool on_edge =
            i == 0 || i == spec_.nx - 1 || (spec_.ny > 1 && (j == 0 || j == spec_.ny - 1));
        if (on_edge) edge = std::max(edge, d);
      }
    }
    return peak > 0.0 ? edge / peak : 0.0;
  }

  const GridSpec& spec() const { return spec_; }

 private:
  static std::complex<double>* as_complex(fftw_complex* p) {
    return reinterpret_cast<std::complex<double>*>(p);
  }
  static const std::complex<double>* as_complex(const fftw_complex* p) {
    return reinterpret_cast<const std::complex<double>*>(p);
  }

  double sum_norm(const fftw_complex* p) const {
    const auto* c = as_complex(p);
    double acc = 0.0;
    for (std::size_t i = 0; i < n_; ++i) acc += std::norm(c[i]);
    return acc * spec_.cell_area();
  }

  // exp(-i V dt / 2 hbar) pointwise. With D = diag(1, e^{i k_L y}) the local
  // potential is D V0 D^dagger, so only the off-diagonals pick up phases.
  void half_potential() {
    auto* g = as_complex(ground_);
    auto* e = as_complex(excited_);
    const int edge = spec_.edge_index();
    for (int i = 0; i < spec_.nx; ++i) {
      const std::size_t row = static_cast<std::size_t>(i) * spec_.ny;
      if (i < edge) {
        for (int j = 0; j < spec_.ny; ++j) e[row + j] *= dark_[3];
        continue;
      }
      const detail::Mat2& u = i == edge ? edge_ : lit_;
      for (int j = 0; j < spec_.ny; ++j) {
        const std::complex<double> ph = laser_phase_[j];
        const std::complex<double> a = g[row + j];
        const std::complex<double> b = e[row + j];
        g[row + j] = u[0] * a + u[1] * std::conj(ph) * b;
        e[row + j] = u[2] * ph * a + u[3] * b;
      }
    }
  }

  PhysParams params_;
  GridSpec spec_;
  std::size_t n_ = 0;
  fftw_complex* ground_ = nullptr;
  fftw_complex* excited_ = nullptr;
  fftw_plan fwd_g_{}, bwd_g_{}, fwd_e_{}, bwd_e_{};
  std::vector<std::complex<double>> kinetic_;
  std::vector<std::complex<double>> laser_phase_;
  detail::Mat2 lit_{}, dark_{}, edge_{};
  double time_ = 0.0;
  double last_norm_ = 0.0;
};

/// One-step convenience wrapper; builds a propagator per call.
inline GridState step(const GridState& state, const PhysParams& p, const GridSpec& spec) {
  SplitStepPropagator prop(p, spec);
  prop.load(state);
  prop.step();
  return prop.snapshot();
}

/// Norm and excited population after every step of a run.
struct NormHistory {
  double dt = 0.0;
  int record_every = 1;
  std::vector<double> times;
  std::vector<double> norms;
  std::vector<double> excited_norms;
  /// max over recorded steps of GridState boundary density / peak density
  double max_boundary_ratio = 0.0;
};

/// History of a sequence of snapshots taken every dt.
inline NormHistory history_of(std::span<const GridState> states, const GridSpec& spec) {
  NormHistory h;
  h.dt = spec.dt;
  h.record_every = 1;
  for (const auto& s : states) {
    h.times.push_back(s.time);
    h.norms.push_back(s.norm(spec.cell_area()));
    h.excited_norms.push_back(s.excited_norm(spec.cell_area()));
  }
  return h;
}

struct OracleRun {
  NormHistory history;
  GridState final_state;
};

inline OracleRun run_oracle(const PhysParams& p, const GaussianPacket2D& g, const GridSpec& spec) {
  p.validate();
  g.validate();
  spec.validate();
  check_resolution(spec, p, g);
  SplitStepPropagator prop(p, spec);
  prop.load(initial_state(g, p, spec));
  OracleRun run;
  NormHistory& h = run.history;
  h.dt = spec.dt;
  h.record_every = spec.record_every;
  h.times.reserve(spec.n_steps + 1);
  auto record = [&](int n) {
    h.times.push_back(prop.time());
    h.norms.push_back(prop.norm());
    h.excited_norms.push_back(prop.excited_norm());
    if (n % spec.record_every == 0) {
      h.max_boundary_ratio = std::max(h.max_boundary_ratio, prop.boundary_ratio());
    }
  };
  record(0);
  for (int n = 1; n <= spec.n_steps; ++n) {
    prop.step();
    record(n);
  }
  run.final_state = prop.snapshot();
  return run;
}

/// Pi = -d||Psi||^2/dt by second-order differences of the per-step norms,
/// reported at every record_every-th step.
inline ToaSeries pi_from_norm(const NormHistory& h) {
  const std::size_t n = h.norms.size();
  if (n < 3) throw ParameterError("pi_from_norm: need at least three norms");
  ToaSeries s;
  for (std::size_t i = 0; i < n; i += h.record_every) {
    double d;
    if (i == 0) {
      d = (-3.0 * h.norms[0] + 4.0 * h.norms[1] - h.norms[2]) / (2.0 * h.dt);
    } else if (i == n - 1) {
      d = (3.0 * h.norms[i] - 4.0 * h.norms[i - 1] + h.norms[i - 2]) / (2.0 * h.dt);
    } else {
      d = (h.norms[i + 1] - h.norms[i - 1]) / (2.0 * h.dt);
    }
    s.times.push_back(h.times[i]);
    s.pi_values.push_back(-d);
  }
  s.update_cumulative();
  return s;
}

/// Pi = gamma * integral |Psi_excited|^2.
inline ToaSeries pi_from_population(const NormHistory& h, double decay) {
  ToaSeries s;
  for (std::size_t i = 0; i < h.norms.size(); i += h.record_every) {
    s.times.push_back(h.times[i]);
    s.pi_values.push_back(decay * h.excited_norms[i]);
  }
  s.update_cumulative();
  return s;
}

}  // namespace toa
