#pragma once

// Run configuration: sectioned key = value text.
//
//   [params]
//   mass = 2.2069e-25 kg
//   decay = 3.3e8 /s
//
// Every key is declared in schema(); anything else is rejected. Numbers take
// an optional unit suffix matching the key's dimension. Lists are comma
// separated. Later layers (file, environment) override earlier ones (preset).

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "toa/errors.hpp"

namespace toa::config {

enum class Kind { Number, Integer, Boolean, List, Text };
enum class Dim { None, Length, Time, Rate, Wavenumber, Velocity, Mass };

struct KeyInfo {
  const char* section;
  const char* key;
  Kind kind;
  Dim dim;
  const char* help;
};

inline const std::vector<KeyInfo>& schema() {
  static const std::vector<KeyInfo> keys = {
      {"params", "mass", Kind::Number, Dim::Mass, "atomic mass"},
      {"params", "rabi", Kind::Number, Dim::Rate, "Rabi frequency Omega"},
      {"params", "decay", Kind::Number, Dim::Rate, "decay rate gamma"},
      {"params", "laser_detuning", Kind::Number, Dim::Rate, "laser detuning Delta_L (default 0)"},
      {"params", "laser_wavenumber", Kind::Number, Dim::Wavenumber, "laser wavenumber k_L"},
      {"params", "compensate", Kind::Boolean, Dim::None,
       "add the kinetic detuning at ky0 to Delta_L (default false)"},

      {"packet", "x0", Kind::Number, Dim::Length, "mean x position"},
      {"packet", "y0", Kind::Number, Dim::Length, "mean y position (default 0)"},
      {"packet", "dx", Kind::Number, Dim::Length, "x width (or sigma_kx)"},
      {"packet", "dy", Kind::Number, Dim::Length, "y width (or sigma_ky)"},
      {"packet", "sigma_kx", Kind::Number, Dim::Wavenumber, "x momentum width, 1/(2 dx)"},
      {"packet", "sigma_ky", Kind::Number, Dim::Wavenumber, "y momentum width, 1/(2 dy)"},
      {"packet", "kx0", Kind::Number, Dim::Wavenumber, "mean k_x (or vx0)"},
      {"packet", "ky0", Kind::Number, Dim::Wavenumber, "mean k_y (or vy0, default 0)"},
      {"packet", "vx0", Kind::Number, Dim::Velocity, "mean x velocity"},
      {"packet", "vy0", Kind::Number, Dim::Velocity, "mean y velocity"},

      {"quadrature", "n_kx", Kind::Integer, Dim::None, "k_x nodes (default 96)"},
      {"quadrature", "n_ky", Kind::Integer, Dim::None, "k_y nodes (default 64)"},
      {"quadrature", "span_sigmas", Kind::Number, Dim::None, "half width in sigmas (default 6)"},
      {"quadrature", "t_start", Kind::Number, Dim::Time, "first time sample (default 0)"},
      {"quadrature", "t_end", Kind::Number, Dim::Time, "last time sample"},
      {"quadrature", "n_times", Kind::Integer, Dim::None, "number of time samples"},

      {"grid", "x_min", Kind::Number, Dim::Length, "box left edge (< 0)"},
      {"grid", "x_max", Kind::Number, Dim::Length, "box right edge (> 0)"},
      {"grid", "y_min", Kind::Number, Dim::Length, "box bottom edge"},
      {"grid", "y_max", Kind::Number, Dim::Length, "box top edge"},
      {"grid", "nx", Kind::Integer, Dim::None, "x points (power of two)"},
      {"grid", "ny", Kind::Integer, Dim::None, "y points (power of two)"},
      {"grid", "dt", Kind::Number, Dim::Time, "time step (default: automatic)"},
      {"grid", "t_end", Kind::Number, Dim::Time, "propagation time"},
      {"grid", "n_records", Kind::Integer, Dim::None, "output samples (default 400)"},

      {"scan", "vy_values", Kind::List, Dim::Velocity, "transverse velocities to scan"},
      {"scan", "vy_min", Kind::Number, Dim::Velocity, "scan start (with vy_max, n_vy)"},
      {"scan", "vy_max", Kind::Number, Dim::Velocity, "scan end"},
      {"scan", "n_vy", Kind::Integer, Dim::None, "scan points"},

      {"deconv", "epsilon", Kind::Number, Dim::None, "Wiener regularization (default 1e-4)"},
      {"deconv", "pi_csv", Kind::Text, Dim::None, "input Pi CSV (default: compute pi_2d)"},
      {"deconv", "decay_factors", Kind::List, Dim::None, "also sweep gamma by these factors"},

      {"run", "model", Kind::Text, Dim::None, "toa: 2d or 1d (default 2d)"},
      {"run", "dy_factors", Kind::List, Dim::None, "toa: family of runs with dy = f * dx"},
      {"run", "threads", Kind::Integer, Dim::None, "worker cap (0 = all cores)"},
  };
  return keys;
}

inline const KeyInfo* find_key(std::string_view section, std::string_view key) {
  for (const auto& k : schema()) {
    if (section == k.section && key == k.key) return &k;
  }
  return nullptr;
}

inline const std::vector<std::string>& section_order() {
  static const std::vector<std::string> order = {"params", "packet", "quadrature", "grid",
                                                 "scan",   "deconv", "run"};
  return order;
}

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

struct Unit {
  const char* name;
  Dim dim;
  double factor;
};

inline const std::vector<Unit>& units() {
  static const std::vector<Unit> table = {
      {"m", Dim::Length, 1.0},           {"cm", Dim::Length, 1e-2},
      {"mm", Dim::Length, 1e-3},         {"um", Dim::Length, 1e-6},
      {"nm", Dim::Length, 1e-9},         {"s", Dim::Time, 1.0},
      {"ms", Dim::Time, 1e-3},           {"us", Dim::Time, 1e-6},
      {"ns", Dim::Time, 1e-9},           {"/s", Dim::Rate, 1.0},
      {"1/s", Dim::Rate, 1.0},           {"/ms", Dim::Rate, 1e3},
      {"/us", Dim::Rate, 1e6},           {"/ns", Dim::Rate, 1e9},
      {"/m", Dim::Wavenumber, 1.0},      {"1/m", Dim::Wavenumber, 1.0},
      {"/cm", Dim::Wavenumber, 1e2},     {"/mm", Dim::Wavenumber, 1e3},
      {"/um", Dim::Wavenumber, 1e6},     {"/nm", Dim::Wavenumber, 1e9},
      {"m/s", Dim::Velocity, 1.0},       {"cm/s", Dim::Velocity, 1e-2},
      {"mm/s", Dim::Velocity, 1e-3},     {"um/s", Dim::Velocity, 1e-6},
      {"kg", Dim::Mass, 1.0},            {"u", Dim::Mass, 1.66053906660e-27},
  };
  return table;
}

}  // namespace detail

/// Parses "<number> [unit]" for a key of dimension dim.
inline double parse_number(std::string_view text, Dim dim, const std::string& where) {
  const std::string s = detail::trim(text);
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr == first) throw ConfigError(where + ": expected a number, got '" + s + "'");
  const std::string unit = detail::trim(std::string_view(ptr, last - ptr));
  if (!std::isfinite(v)) throw ConfigError(where + ": value must be finite");
  if (unit.empty()) return v;
  for (const auto& u : detail::units()) {
    if (unit == u.name) {
      if (u.dim != dim) throw ConfigError(where + ": unit '" + unit + "' has the wrong dimension");
      return v * u.factor;
    }
  }
  throw ConfigError(where + ": unknown unit '" + unit + "'");
}

inline long parse_integer(std::string_view text, const std::string& where) {
  const std::string s = detail::trim(text);
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(where + ": expected an integer, got '" + s + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view text, const std::string& where) {
  const std::string s = detail::trim(text);
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  throw ConfigError(where + ": expected true or false, got '" + s + "'");
}

inline std::vector<double> parse_list(std::string_view text, Dim dim, const std::string& where) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item, dim, where));
  if (out.empty()) throw ConfigError(where + ": empty list");
  return out;
}

/// Fixed formatting used for every number written back out.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Raw key/value text per section, checked against the schema on insertion.
class Document {
 public:
  void set(const std::string& section, const std::string& key, const std::string& value,
           const std::string& origin) {
    const KeyInfo* info = find_key(section, key);
    if (info == nullptr) {
      throw ConfigError(origin + ": unknown key '" + key + "' in section [" + section + "]");
    }
    check_type(*info, value, origin + ": " + section + "." + key);
    values_[section][key] = detail::trim(value);
  }

  void erase(const std::string& section, const std::string& key) {
    auto it = values_.find(section);
    if (it != values_.end()) it->second.erase(key);
  }

  const std::string* find(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    if (s == values_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  bool has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
  }

  bool has_section(const std::string& section) const {
    auto s = values_.find(section);
    return s != values_.end() && !s->second.empty();
  }

  /// Overlay: keys present in other replace ours.
  void merge(const Document& other) {
    for (const auto& [section, kv] : other.values_) {
      for (const auto& [key, value] : kv) values_[section][key] = value;
    }
  }

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return values_;
  }

  /// Canonical text; sections in schema order, keys sorted.
  std::string to_text() const {
    std::string out;
    for (const auto& name : section_order()) {
      auto s = values_.find(name);
      if (s == values_.end() || s->second.empty()) continue;
      if (!out.empty()) out += "\n";
      out += "[" + name + "]\n";
      for (const auto& [key, value] : s->second) out += key + " = " + value + "\n";
    }
    return out;
  }

 private:
  static void check_type(const KeyInfo& info, const std::string& value, const std::string& where) {
    switch (info.kind) {
      case Kind::Number: parse_number(value, info.dim, where); break;
      case Kind::Integer: parse_integer(value, where); break;
      case Kind::Boolean: parse_bool(value, where); break;
      case Kind::List: parse_list(value, info.dim, where); break;
      case Kind::Text:
        if (detail::trim(value).empty()) throw ConfigError(where + ": empty value");
        break;
    }
  }

  std::map<std::string, std::map<std::string, std::string>> values_;
};

inline Document parse(std::string_view text, const std::string& origin) {
  Document doc;
  std::string section;
  std::stringstream ss{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    const auto hash = line.find_first_of("#;");
    std::string body = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError(where + ": malformed section header");
      section = detail::trim(std::string_view(body).substr(1, body.size() - 2));
      if (std::find(section_order().begin(), section_order().end(), section) ==
          section_order().end()) {
        throw ConfigError(where + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    if (section.empty()) throw ConfigError(where + ": key outside of any section");
    const std::string key = detail::trim(std::string_view(body).substr(0, eq));
    doc.set(section, key, body.substr(eq + 1), where);
  }
  return doc;
}

inline constexpr std::string_view kEnvPrefix = "TOA_SIM_";

/// TOA_SIM_<SECTION>_<KEY>=value, e.g. TOA_SIM_PARAMS_DECAY=3e4. Any variable
/// with the prefix that does not name a schema key is an error.
inline Document from_environment(char** envp) {
  Document doc;
  if (envp == nullptr) return doc;
  for (char** e = envp; *e != nullptr; ++e) {
    std::string_view entry(*e);
    if (entry.substr(0, kEnvPrefix.size()) != kEnvPrefix) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    std::string name(entry.substr(kEnvPrefix.size(), eq - kEnvPrefix.size()));
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const auto us = name.find('_');
    const std::string var(entry.substr(0, eq));
    if (us == std::string::npos) throw ConfigError("environment: unknown variable " + var);
    doc.set(name.substr(0, us), name.substr(us + 1), std::string(entry.substr(eq + 1)),
            "environment " + var);
  }
  return doc;
}

inline std::vector<std::string> preset_names() { return {"fig2", "fig3", "fig4", "fig5"}; }

/// Cesium parameter regime of the figures: Omega = 1.67e8 /s, gamma = 3.3e8 /s,
/// dx = 0.24 um, x0 = -1.32 um, <v_x> = 9 cm/s.
inline Document preset(std::string_view name) {
  const std::string common =
      "[params]\n"
      "mass = 2.2069e-25 kg\n"
      "rabi = 1.67e8 /s\n"
      "decay = 3.3e8 /s\n"
      "laser_detuning = 0\n"
      "laser_wavenumber = 7.37e6 /m\n"
      "[packet]\n"
      "x0 = -1.32 um\n"
      "dx = 0.24 um\n"
      "vx0 = 9 cm/s\n";
  std::string text;
  if (name == "fig2") {
    text = common +
           "dy = 0.24 um\n"
           "[quadrature]\n"
           "n_kx = 64\nn_ky = 96\nt_start = 0\nt_end = 40 us\nn_times = 401\n"
           "[run]\n"
           "model = 2d\n"
           "dy_factors = 100, 1e-4, 3e-5, 1e-5, 3e-6\n";
  } else if (name == "fig3" || name == "fig4") {
    // |<k_y>| = 1000 <k_x>, i.e. |<v_y>| = 90 m/s.
    text = common + "dy = 0.24 um\n" + (name == "fig3" ? "vy0 = 90 m/s\n" : "vy0 = -90 m/s\n") +
           "[quadrature]\n"
           "n_kx = 64\nn_ky = 32\nt_start = 0\nt_end = 40 us\nn_times = 401\n";
  } else if (name == "fig5") {
    text = common +
           "[scan]\n"
           "vy_values = -1000, -500, -200, -100, -50, -20, -10, -5, 0, 5, 10, 20, 50, 100, 200\n";
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  return parse(text, "preset " + std::string(name));
}

/// Typed access to a merged document. Every value read is recorded in
/// canonical() in SI units, so a rerun from canonical().to_text() reads the
/// same doubles.
class Resolver {
 public:
  explicit Resolver(const Document& doc) : doc_(doc) {}

  bool has(const std::string& s, const std::string& k) const { return doc_.has(s, k); }

  double number(const std::string& s, const std::string& k) {
    const auto v = optional_number(s, k);
    if (!v) throw ConfigError("missing required key " + s + "." + k);
    return *v;
  }

  std::optional<double> optional_number(const std::string& s, const std::string& k) {
    const std::string* raw = doc_.find(s, k);
    if (raw == nullptr) return std::nullopt;
    const double v = parse_number(*raw, info(s, k).dim, s + "." + k);
    record(s, k, format_number(v));
    return v;
  }

  double number_or(const std::string& s, const std::string& k, double fallback) {
    const auto v = optional_number(s, k);
    if (v) return *v;
    record(s, k, format_number(fallback));
    return fallback;
  }

  long integer(const std::string& s, const std::string& k) {
    const std::string* raw = doc_.find(s, k);
    if (raw == nullptr) throw ConfigError("missing required key " + s + "." + k);
    const long v = parse_integer(*raw, s + "." + k);
    record(s, k, std::to_string(v));
    return v;
  }

  long integer_or(const std::string& s, const std::string& k, long fallback) {
    if (doc_.has(s, k)) return integer(s, k);
    record(s, k, std::to_string(fallback));
    return fallback;
  }

  bool boolean_or(const std::string& s, const std::string& k, bool fallback) {
    const std::string* raw = doc_.find(s, k);
    const bool v = raw ? parse_bool(*raw, s + "." + k) : fallback;
    record(s, k, v ? "true" : "false");
    return v;
  }

  std::optional<std::vector<double>> optional_list(const std::string& s, const std::string& k) {
    const std::string* raw = doc_.find(s, k);
    if (raw == nullptr) return std::nullopt;
    auto v = parse_list(*raw, info(s, k).dim, s + "." + k);
    std::string text;
    for (std::size_t i = 0; i < v.size(); ++i) text += (i ? ", " : "") + format_number(v[i]);
    record(s, k, text);
    return v;
  }

  std::string text_or(const std::string& s, const std::string& k, const std::string& fallback) {
    const std::string* raw = doc_.find(s, k);
    const std::string v = raw ? *raw : fallback;
    record(s, k, v);
    return v;
  }

  std::optional<std::string> optional_text(const std::string& s, const std::string& k) {
    const std::string* raw = doc_.find(s, k);
    if (raw == nullptr) return std::nullopt;
    record(s, k, *raw);
    return *raw;
  }

  /// At most one of a and b may be given.
  void exclusive(const std::string& s, const std::string& a, const std::string& b) const {
    if (doc_.has(s, a) && doc_.has(s, b)) {
      throw ConfigError(s + "." + a + " and " + s + "." + b + " are mutually exclusive");
    }
  }

  /// Stores a derived canonical value (e.g. kx0 computed from vx0).
  void record(const std::string& s, const std::string& k, const std::string& value) {
    canonical_.set(s, k, value, "canonical");
  }
  void forget(const std::string& s, const std::string& k) { canonical_.erase(s, k); }

  const Document& canonical() const { return canonical_; }

 private:
  static const KeyInfo& info(const std::string& s, const std::string& k) {
    const KeyInfo* i = find_key(s, k);
    if (i == nullptr) throw ConfigError("unknown key " + s + "." + k);
    return *i;
  }

  const Document& doc_;
  Document canonical_;
};

/// Help text listing every key and the accepted unit suffixes.
inline std::string describe() {
  std::string out = "Config keys (section.key: meaning):\n";
  for (const auto& k : schema()) {
    out += "  " + std::string(k.section) + "." + k.key + ": " + k.help + "\n";
  }
  out +=
      "Unit suffixes: length m cm mm um nm; time s ms us ns; rate /s /ms /us /ns;\n"
      "  wavenumber /m /cm /mm /um /nm; velocity m/s cm/s mm/s um/s; mass kg u.\n"
      "Environment: TOA_SIM_<SECTION>_<KEY>=value overrides the config file.\n";
  return out;
}

}  // namespace toa::config
