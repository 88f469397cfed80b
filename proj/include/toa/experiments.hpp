#pragma once

// Experiment drivers behind the toa-sim subcommands. Each driver reads what it
// needs from a Resolver, computes in memory and returns the files to write;
// the caller does all I/O.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "toa/config.hpp"
#include "toa/eigen2d.hpp"
#include "toa/fluxdeconv.hpp"
#include "toa/oracle.hpp"
#include "toa/packet.hpp"
#include "toa/physparams.hpp"
#include "toa/toa.hpp"

namespace toa::app {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kCsvHeader = "# toa-sim csv v1\n";

struct Artifact {
  std::string name;
  std::string content;
};

struct RunOutput {
  std::vector<Artifact> files;
  nlohmann::json diagnostics = nlohmann::json::object();
};

/// Options supplied on the command line rather than in the config.
struct RunOptions {
  /// Worker cap; negative means "take [run] threads or all cores".
  int threads = -1;
};

// ---------------------------------------------------------------- CSV output

inline std::string csv_table(const std::vector<std::string>& header,
                             const std::vector<std::vector<double>>& columns) {
  std::string out = kCsvHeader;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += "\n";
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  char buf[32];
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", columns[c][r]);
      if (c) out += ",";
      out += buf;
    }
    out += "\n";
  }
  return out;
}

inline std::string series_csv(const ToaSeries& s) {
  return csv_table({"t", "pi_raw", "pi_clipped", "cumulative"},
                   {s.times, s.pi_values, s.clipped(), s.cumulative});
}

/// Reads the t and pi_raw columns of a series CSV.
inline ToaSeries read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line + "\n" != kCsvHeader) {
    throw ConfigError(path + ": not a toa-sim csv v1 file");
  }
  if (!std::getline(in, line) || line.rfind("t,pi_raw", 0) != 0) {
    throw ConfigError(path + ": expected columns t,pi_raw,...");
  }
  ToaSeries s;
  int lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    const std::string where = path + ":" + std::to_string(lineno);
    s.times.push_back(config::parse_number(a, config::Dim::None, where));
    s.pi_values.push_back(config::parse_number(b, config::Dim::None, where));
  }
  if (in.bad()) throw IoError("error reading " + path);
  if (s.times.size() < 2) throw ConfigError(path + ": fewer than two samples");
  s.update_cumulative();
  return s;
}

// --------------------------------------------------------------- readers

inline PhysParams read_params(config::Resolver& r) {
  PhysParams p;
  p.mass = r.number("params", "mass");
  p.rabi = r.number("params", "rabi");
  p.decay = r.number("params", "decay");
  p.laser_detuning = r.number_or("params", "laser_detuning", 0.0);
  p.laser_wavenumber = r.number("params", "laser_wavenumber");
  p.validate();
  return p;
}

// Reads a mean wavenumber given either directly or as a velocity.
inline double read_wavenumber(config::Resolver& r, const std::string& k, const std::string& v,
                              double mass, std::optional<double> fallback) {
  r.exclusive("packet", k, v);
  double value;
  if (r.has("packet", v)) {
    value = r.number("packet", v) * mass / kHbar;
    r.forget("packet", v);
  } else if (r.has("packet", k) || !fallback) {
    value = r.number("packet", k);
  } else {
    value = *fallback;
  }
  r.record("packet", k, config::format_number(value));
  return value;
}

// Reads a width given either in position space or as a momentum width.
inline double read_width(config::Resolver& r, const std::string& w, const std::string& sigma) {
  r.exclusive("packet", w, sigma);
  double value;
  if (r.has("packet", sigma)) {
    const double s = r.number("packet", sigma);
    if (!(s > 0.0)) throw ConfigError("packet." + sigma + " must be > 0");
    value = 0.5 / s;
    r.forget("packet", sigma);
  } else {
    value = r.number("packet", w);
  }
  r.record("packet", w, config::format_number(value));
  return value;
}

inline GaussianPacket2D read_packet(config::Resolver& r, double mass, bool need_y = true) {
  GaussianPacket2D g;
  g.x0 = r.number("packet", "x0");
  g.dx = read_width(r, "dx", "sigma_kx");
  g.kx0 = read_wavenumber(r, "kx0", "vx0", mass, std::nullopt);
  if (need_y) {
    g.y0 = r.number_or("packet", "y0", 0.0);
    g.dy = read_width(r, "dy", "sigma_ky");
    g.ky0 = read_wavenumber(r, "ky0", "vy0", mass, 0.0);
  } else {
    g.dy = g.dx;
  }
  g.validate();
  return g;
}

/// Applies [params] compensate: Delta_L += Delta_K(ky0).
inline void apply_compensation(config::Resolver& r, PhysParams& p, double ky0) {
  if (r.boolean_or("params", "compensate", false)) {
    p.laser_detuning += kinetic_detuning(p, ky0).total;
  }
}

inline unsigned read_threads(config::Resolver& r, const RunOptions& opt) {
  long t = opt.threads >= 0 ? opt.threads : r.integer_or("run", "threads", 0);
  r.forget("run", "threads");
  if (t < 0) throw ConfigError("threads must be >= 0");
  return static_cast<unsigned>(t);
}

inline QuadratureSpec read_quadrature(config::Resolver& r, const RunOptions& opt) {
  QuadratureSpec q;
  q.n_kx = static_cast<int>(r.integer_or("quadrature", "n_kx", q.n_kx));
  q.n_ky = static_cast<int>(r.integer_or("quadrature", "n_ky", q.n_ky));
  q.span_sigmas = r.number_or("quadrature", "span_sigmas", q.span_sigmas);
  const double t0 = r.number_or("quadrature", "t_start", 0.0);
  const double t1 = r.number("quadrature", "t_end");
  const long n = r.integer("quadrature", "n_times");
  if (n < 2 || n > 10000000) throw ConfigError("quadrature.n_times must be in [2, 1e7]");
  q.times = uniform_times(t0, t1, static_cast<int>(n));
  q.threads = read_threads(r, opt);
  q.validate();
  return q;
}

inline GridSpec read_grid(config::Resolver& r, const PhysParams& p, const GaussianPacket2D& g) {
  GridSpec s;
  s.x_min = r.number("grid", "x_min");
  s.x_max = r.number("grid", "x_max");
  s.y_min = r.number("grid", "y_min");
  s.y_max = r.number("grid", "y_max");
  s.nx = static_cast<int>(r.integer("grid", "nx"));
  s.ny = static_cast<int>(r.integer("grid", "ny"));
  const double t_end = r.number("grid", "t_end");
  if (!(t_end > 0.0)) throw ConfigError("grid.t_end must be > 0");
  const double dt_max = r.has("grid", "dt") ? r.number("grid", "dt") : default_time_step(p, g);
  if (!(dt_max > 0.0)) throw ConfigError("grid.dt must be > 0");
  const double steps = std::ceil(t_end / dt_max - 1e-9);
  if (steps > 1e8) throw ConfigError("grid: more than 1e8 time steps requested");
  s.n_steps = static_cast<int>(steps);
  s.dt = t_end / s.n_steps;
  r.forget("grid", "dt");
  const long records = r.integer_or("grid", "n_records", 400);
  if (records < 2) throw ConfigError("grid.n_records must be >= 2");
  s.record_every = std::max(1, static_cast<int>(s.n_steps / records));
  s.validate();
  return s;
}

// ---------------------------------------------------------------- experiments

inline nlohmann::json series_diagnostics(const ToaSeries& s) {
  nlohmann::json d;
  double peak = 0.0, t_peak = 0.0, lowest = 0.0;
  for (std::size_t i = 0; i < s.pi_values.size(); ++i) {
    if (s.pi_values[i] > peak) {
      peak = s.pi_values[i];
      t_peak = s.times[i];
    }
    lowest = std::min(lowest, s.pi_values[i]);
  }
  const EmissionTotal e = emission_total(s);
  d["peak"] = peak;
  d["t_peak"] = t_peak;
  d["min_over_peak"] = peak > 0.0 ? lowest / peak : 0.0;
  d["cumulative_end"] = s.cumulative.empty() ? 0.0 : s.cumulative.back();
  d["emission_total"] = e.total;
  d["emission_tail"] = e.tail;
  d["tail_warning"] = e.tail_warning;
  d["max_imag_ratio"] = s.max_imag_ratio;
  for (const auto& [k, v] : s.metadata.items()) d[k] = v;
  return d;
}

inline RunOutput run_eigen(config::Resolver& r) {
  PhysParams p = read_params(r);
  const double kx = read_wavenumber(r, "kx0", "vx0", p.mass, std::nullopt);
  const double ky0 = read_wavenumber(r, "ky0", "vy0", p.mass, 0.0);
  apply_compensation(r, p, ky0);

  std::vector<double> vy;
  if (auto list = r.optional_list("scan", "vy_values")) {
    if (r.has("scan", "vy_min") || r.has("scan", "vy_max") || r.has("scan", "n_vy")) {
      throw ConfigError("scan.vy_values excludes vy_min/vy_max/n_vy");
    }
    vy = *list;
  } else {
    const double a = r.number("scan", "vy_min"), b = r.number("scan", "vy_max");
    const long n = r.integer("scan", "n_vy");
    if (n < 1 || n > 10000000) throw ConfigError("scan.n_vy must be in [1, 1e7]");
    for (long i = 0; i < n; ++i) vy.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  }

  std::vector<std::vector<double>> cols(13);
  double min_den = INFINITY;
  for (double v : vy) {
    const double ky = v * p.mass / kHbar;
    const EigenSolution2D s = solve_2d(p, kx, ky);
    const double row[] = {v,
                          ky,
                          s.delta_eff,
                          std::norm(s.R1),
                          std::norm(s.R2),
                          s.R1.real(),
                          s.R1.imag(),
                          s.R2.real(),
                          s.R2.imag(),
                          s.C_plus.real(),
                          s.C_plus.imag(),
                          s.C_minus.real(),
                          s.C_minus.imag()};
    for (std::size_t c = 0; c < cols.size(); ++c) cols[c].push_back(row[c]);
    min_den = std::min(min_den, std::abs(s.denominator));
  }
  RunOutput out;
  out.files.push_back({"eigen.csv",
                       csv_table({"v_y", "k_y", "delta_eff", "r1_abs2", "r2_abs2", "r1_re", "r1_im",
                                  "r2_re", "r2_im", "c_plus_re", "c_plus_im", "c_minus_re",
                                  "c_minus_im"},
                                 cols)});
  out.diagnostics["k_x"] = kx;
  out.diagnostics["min_abs_denominator"] = min_den;
  out.diagnostics["recoil_shift"] = p.recoil_shift();
  return out;
}

inline RunOutput run_toa(config::Resolver& r, const RunOptions& opt) {
  PhysParams p = read_params(r);
  const std::string model = r.text_or("run", "model", "2d");
  if (model != "2d" && model != "1d") throw ConfigError("run.model must be 2d or 1d");
  const bool two_d = model == "2d";
  GaussianPacket2D g = read_packet(r, p.mass, two_d);
  if (two_d) apply_compensation(r, p, g.ky0);
  const QuadratureSpec q = read_quadrature(r, opt);
  const auto factors = r.optional_list("run", "dy_factors");

  RunOutput out;
  if (!two_d) {
    if (factors) throw ConfigError("run.dy_factors needs run.model = 2d");
    const ToaSeries s = pi_1d(p, g.x_marginal(), q);
    out.files.push_back({"toa.csv", series_csv(s)});
    out.diagnostics["toa.csv"] = series_diagnostics(s);
    return out;
  }
  if (!factors) {
    const ToaSeries s = pi_2d(p, g, q);
    out.files.push_back({"toa.csv", series_csv(s)});
    out.diagnostics["toa.csv"] = series_diagnostics(s);
    return out;
  }
  for (std::size_t i = 0; i < factors->size(); ++i) {
    const double f = (*factors)[i];
    if (!(f > 0.0)) throw ConfigError("run.dy_factors must be > 0");
    GaussianPacket2D gi = g;
    gi.dy = f * g.dx;
    const ToaSeries s = pi_2d(p, gi, q);
    const std::string name = "toa_" + std::to_string(i) + ".csv";
    out.files.push_back({name, series_csv(s)});
    nlohmann::json d = series_diagnostics(s);
    d["dy"] = gi.dy;
    d["dy_factor"] = f;
    out.diagnostics[name] = d;
  }
  return out;
}

inline RunOutput run_compare(config::Resolver& r, const RunOptions& opt) {
  PhysParams p = read_params(r);
  const GaussianPacket2D g = read_packet(r, p.mass);
  apply_compensation(r, p, g.ky0);
  const QuadratureSpec q = read_quadrature(r, opt);

  PhysParams shifted = p;
  shifted.laser_detuning += kinetic_detuning(p, g.ky0).total;
  const ToaSeries one = pi_1d(p, g.x_marginal(), q);
  const ToaSeries two = pi_2d(p, g, q);
  const ToaSeries comp = pi_2d(shifted, g, q);

  RunOutput out;
  out.files.push_back({"pi_1d.csv", series_csv(one)});
  out.files.push_back({"pi_2d.csv", series_csv(two)});
  out.files.push_back({"pi_2d_compensated.csv", series_csv(comp)});
  out.diagnostics["pi_1d.csv"] = series_diagnostics(one);
  out.diagnostics["pi_2d.csv"] = series_diagnostics(two);
  out.diagnostics["pi_2d_compensated.csv"] = series_diagnostics(comp);
  out.diagnostics["l1_2d_vs_1d"] = relative_l1_distance(two, one);
  out.diagnostics["l1_compensated_vs_1d"] = relative_l1_distance(comp, one);
  out.diagnostics["compensated_laser_detuning"] = shifted.laser_detuning;
  return out;
}

inline RunOutput run_oracle_experiment(config::Resolver& r, const RunOptions& opt) {
  PhysParams p = read_params(r);
  const GaussianPacket2D g = read_packet(r, p.mass);
  apply_compensation(r, p, g.ky0);
  const GridSpec spec = read_grid(r, p, g);
  const OracleRun run = run_oracle(p, g, spec);
  const ToaSeries from_norm = pi_from_norm(run.history);
  const ToaSeries from_pop = pi_from_population(run.history, p.decay);

  std::vector<double> t, norm, excited;
  for (std::size_t i = 0; i < run.history.norms.size(); i += spec.record_every) {
    t.push_back(run.history.times[i]);
    norm.push_back(run.history.norms[i]);
    excited.push_back(run.history.excited_norms[i]);
  }
  double peak = from_pop.peak(), gap = 0.0;
  for (std::size_t i = 0; i < from_norm.pi_values.size(); ++i) {
    gap = std::max(gap, std::abs(from_norm.pi_values[i] - from_pop.pi_values[i]));
  }

  RunOutput out;
  out.files.push_back({"oracle.csv", series_csv(from_norm)});
  out.files.push_back({"oracle_population.csv", series_csv(from_pop)});
  out.files.push_back({"oracle_norm.csv", csv_table({"t", "norm", "excited_norm"}, {t, norm, excited})});
  out.diagnostics["oracle.csv"] = series_diagnostics(from_norm);
  out.diagnostics["final_norm"] = run.history.norms.back();
  out.diagnostics["max_boundary_ratio"] = run.history.max_boundary_ratio;
  out.diagnostics["norm_vs_population_over_peak"] = peak > 0.0 ? gap / peak : gap;
  out.diagnostics["dt"] = spec.dt;
  out.diagnostics["n_steps"] = spec.n_steps;

  // optional quadrature on the recorded times
  if (r.has("quadrature", "n_kx") || r.has("quadrature", "n_ky")) {
    for (const char* k : {"t_start", "t_end", "n_times"}) {
      if (r.has("quadrature", k)) {
        throw ConfigError(std::string("quadrature.") + k + " is taken from the grid for the oracle command");
      }
    }
    QuadratureSpec q;
    q.n_kx = static_cast<int>(r.integer_or("quadrature", "n_kx", q.n_kx));
    q.n_ky = static_cast<int>(r.integer_or("quadrature", "n_ky", q.n_ky));
    q.span_sigmas = r.number_or("quadrature", "span_sigmas", q.span_sigmas);
    q.times = from_norm.times;
    q.threads = read_threads(r, opt);
    const ToaSeries quad = pi_2d(p, g, q);
    out.files.push_back({"quadrature.csv", series_csv(quad)});
    out.diagnostics["quadrature.csv"] = series_diagnostics(quad);
    out.diagnostics["l1_quadrature_vs_oracle"] = relative_l1_distance(quad, from_norm);
  }
  return out;
}

inline RunOutput run_deconv(config::Resolver& r, const RunOptions& opt) {
  PhysParams p = read_params(r);
  const GaussianPacket2D g = read_packet(r, p.mass);
  apply_compensation(r, p, g.ky0);
  const double eps = r.number_or("deconv", "epsilon", kDefaultWienerEpsilon);
  const auto input = r.optional_text("deconv", "pi_csv");
  const auto factors = r.optional_list("deconv", "decay_factors");
  if (input && factors) throw ConfigError("deconv.pi_csv excludes deconv.decay_factors");

  RunOutput out;
  if (input) {
    const ToaSeries pi = read_series_csv(*input);
    const AtRestDistribution w = w_at_rest(p, pi.times);
    const FluxSeries flux = flux_xline(g, p.mass, pi.times);
    const ToaSeries id = deconvolve(pi, w, eps);
    out.files.push_back({"pi_id.csv", series_csv(id)});
    out.files.push_back({"w.csv", csv_table({"t", "w"}, {w.times, w.values})});
    out.files.push_back({"flux.csv", csv_table({"t", "jbar_x"}, {flux.times, flux.values})});
    out.diagnostics["l1_pi_id_vs_flux"] = relative_l1_distance(id, flux);
    out.diagnostics["l1_pi_vs_flux"] = relative_l1_distance(pi, flux);
    return out;
  }

  const QuadratureSpec q = read_quadrature(r, opt);
  const FluxSeries flux = flux_xline(g, p.mass, q.times);
  out.files.push_back({"flux.csv", csv_table({"t", "jbar_x"}, {flux.times, flux.values})});
  const std::vector<double> sweep = factors ? *factors : std::vector<double>{1.0};
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    if (!(sweep[i] > 0.0)) throw ConfigError("deconv.decay_factors must be > 0");
    PhysParams pi_params = p;
    pi_params.decay *= sweep[i];
    const ToaSeries pi = pi_2d(pi_params, g, q);
    const AtRestDistribution w = w_at_rest(pi_params, q.times);
    const ToaSeries id = deconvolve(pi, w, eps);
    const std::string suffix = factors ? "_" + std::to_string(i) : "";
    out.files.push_back({"pi" + suffix + ".csv", series_csv(pi)});
    out.files.push_back({"pi_id" + suffix + ".csv", series_csv(id)});
    out.files.push_back({"w" + suffix + ".csv", csv_table({"t", "w"}, {w.times, w.values})});
    nlohmann::json d;
    d["decay"] = pi_params.decay;
    d["decay_factor"] = sweep[i];
    d["l1_pi_id_vs_flux"] = relative_l1_distance(id, flux);
    d["l1_pi_vs_flux"] = relative_l1_distance(pi, flux);
    d["pi"] = series_diagnostics(pi);
    runs.push_back(d);
  }
  out.diagnostics["runs"] = runs;
  return out;
}

/// Dispatches a subcommand. The returned files include resolved.cfg and the
/// JSON sidecar <command>.json.
inline RunOutput run_command(const std::string& command, const config::Document& doc,
                             const RunOptions& opt) {
  config::Resolver r(doc);
  RunOutput out;
  if (command == "eigen") {
    out = run_eigen(r);
  } else if (command == "toa") {
    out = run_toa(r, opt);
  } else if (command == "compare") {
    out = run_compare(r, opt);
  } else if (command == "oracle") {
    out = run_oracle_experiment(r, opt);
  } else if (command == "deconv") {
    out = run_deconv(r, opt);
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }

  nlohmann::json config = nlohmann::json::object();
  for (const auto& [section, kv] : r.canonical().sections()) {
    for (const auto& [key, value] : kv) config[section][key] = value;
  }
  nlohmann::json sidecar;
  sidecar["toa_sim_version"] = kVersion;
  sidecar["csv_schema"] = "toa-sim csv v1";
  sidecar["command"] = command;
  sidecar["config"] = config;
  sidecar["diagnostics"] = out.diagnostics;
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : out.files) files.push_back(f.name);
  sidecar["files"] = files;
  out.files.push_back({"resolved.cfg", r.canonical().to_text()});
  out.files.push_back({command + ".json", sidecar.dump(2) + "\n"});
  return out;
}

}  // namespace toa::app
