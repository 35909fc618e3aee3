#include "ionrot/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ionrot/errors.hpp"
#include "ionrot/rotation_ansatz.hpp"

namespace ionrot {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct UnitEntry {
  const char* suffix;
  double to_si;
};

// Accepted suffixes per dimension; values convert the number to SI first.
const std::map<Dimension, std::vector<UnitEntry>>& unit_table() {
  static const std::map<Dimension, std::vector<UnitEntry>> table = {
      {Dimension::mass, {{"u", codata::atomic_mass_unit}, {"kg", 1.0}}},
      {Dimension::length, {{"um", 1e-6}, {"m", 1.0}, {"nm", 1e-9}}},
      {Dimension::time, {{"us", 1e-6}, {"s", 1.0}, {"ns", 1e-9}, {"ms", 1e-3}}},
      {Dimension::frequency,
       {{"MHz", 1e6}, {"kHz", 1e3}, {"Hz", 1.0}, {"GHz", 1e9}}},
      {Dimension::angular_frequency,
       {{"rad/s", 1.0}, {"rad/us", 1e6}}},
      {Dimension::spring_constant,
       {{"N/m", 1.0}, {"pN/m", 1e-12}, {"nN/m", 1e-9}, {"uN/m", 1e-6}}},
      {Dimension::quartic_coefficient,
       {{"N/m^3", 1.0}, {"mN/m^3", 1e-3}, {"uN/m^3", 1e-6}}},
  };
  return table;
}

double parse_angle(const std::string& text, const std::string& field) {
  std::istringstream in(text);
  double value;
  std::string unit;
  if (!(in >> value >> unit))
    throw ConfigError(field + ": expected '<number> <rad|deg|pi>'");
  if (unit == "rad") return value;
  if (unit == "deg") return value * M_PI / 180.0;
  if (unit == "pi") return value * M_PI;
  throw ConfigError(field + ": unknown angle unit '" + unit + "'");
}

} // namespace

double parse_quantity(const std::string& text, Dimension dim,
                      const std::string& field) {
  std::istringstream in(text);
  double value;
  std::string unit;
  if (!(in >> value))
    throw ConfigError(field + ": expected '<number> <unit>', got '" + text +
                      "'");
  if (!(in >> unit))
    throw ConfigError(field + ": missing unit suffix (physical fields need "
                      "explicit units)");
  const auto& table = unit_table().at(dim);
  for (const auto& e : table)
    if (unit == e.suffix) {
      double si = value * e.to_si;
      if (dim == Dimension::frequency) {
        // trap frequencies are given as ordinary frequencies; callers want
        // angular frequency internally
        return UnitSystem::to_internal(2.0 * M_PI * si,
                                       Dimension::angular_frequency);
      }
      return UnitSystem::to_internal(si, dim);
    }
  throw ConfigError(field + ": unknown unit '" + unit + "'");
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line without '=': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("empty key or value in line: " + line);
    if (cfg.raw.count(key))
      throw ConfigError("duplicate key: " + key);
    cfg.raw[key] = value;
  }

  auto get = [&](const std::string& key) -> std::optional<std::string> {
    auto it = cfg.raw.find(key);
    if (it == cfg.raw.end()) return std::nullopt;
    return it->second;
  };
  auto require = [&](const std::string& key) {
    auto v = get(key);
    if (!v) throw ConfigError("missing required key: " + key);
    return *v;
  };
  auto number = [&](const std::string& key, double fallback) {
    auto v = get(key);
    if (!v) return fallback;
    std::istringstream s(*v);
    double x;
    std::string rest;
    if (!(s >> x) || (s >> rest))
      throw ConfigError(key + ": expected a plain number, got '" + *v + "'");
    return x;
  };

  cfg.command = require("command");
  const bool needs_ions = cfg.command != "ratio";
  if (needs_ions) {
    cfg.m1 = parse_quantity(require("ion.m1"), Dimension::mass, "ion.m1");
    cfg.m2 = parse_quantity(require("ion.m2"), Dimension::mass, "ion.m2");
  }

  if (cfg.command == "design-nm" || cfg.command == "design-direct" ||
      cfg.command == "verify" || cfg.command == "sweep") {
    if (auto k = get("trap.k")) {
      cfg.trap_k = parse_quantity(*k, Dimension::spring_constant, "trap.k");
    } else {
      const double w1 = parse_quantity(require("trap.frequency"),
                                       Dimension::frequency, "trap.frequency");
      cfg.trap_k = cfg.m1 * w1 * w1;
    }
  }
  if (cfg.command == "doublewell") {
    cfg.dw_mw2 = parse_quantity(require("doublewell.mw2"),
                                Dimension::spring_constant, "doublewell.mw2");
    cfg.dw_beta =
        parse_quantity(require("doublewell.beta"),
                       Dimension::quartic_coefficient, "doublewell.beta");
  }
  if (cfg.command == "ratio") {
    cfg.ratio_r =
        parse_quantity(require("ratio.r"), Dimension::length, "ratio.r");
    cfg.ratio_theta_dot =
        parse_quantity(require("ratio.theta_dot"),
                       Dimension::angular_frequency, "ratio.theta_dot");
  }

  if (cfg.command != "ratio") {
    cfg.theta_f = parse_angle(require("protocol.theta_f"), "protocol.theta_f");
    std::string tf_key = get("protocol.t_f_list") ? "protocol.t_f_list"
                                                  : "protocol.t_f";
    std::istringstream tfs(require(tf_key));
    std::string item;
    while (std::getline(tfs, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      cfg.t_f.push_back(parse_quantity(item, Dimension::time, tf_key));
    }
    if (cfg.t_f.empty()) throw ConfigError(tf_key + ": no values");
    if (cfg.t_f.size() > 1 && cfg.command != "sweep")
      throw ConfigError(tf_key + ": multiple t_f values need command=sweep");
    cfg.n_free = static_cast<int>(number("protocol.n_free", 4));
    if (cfg.n_free < 0 || cfg.n_free > 4)
      throw ConfigError("protocol.n_free: must be in 0..4");
    if (get("protocol.c3") || get("protocol.c4") || get("protocol.c5") ||
        get("protocol.c6")) {
      std::array<double, 4> c{number("protocol.c3", 0.0),
                              number("protocol.c4", 0.0),
                              number("protocol.c5", 0.0),
                              number("protocol.c6", 0.0)};
      cfg.fixed_coefficients = c;
    }
    if (auto nf = get("sweep.n_free_set")) {
      std::istringstream ss(*nf);
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) cfg.sweep_n_free.push_back(std::stoi(item));
      }
    }
  }

  cfg.sim_n1 = static_cast<int>(number("sim.n1", 256));
  cfg.sim_n2 = static_cast<int>(number("sim.n2", 256));
  cfg.sim_margin_sigmas = number("sim.margin_sigmas", 6.0);
  cfg.sim_drift_cap = number("sim.drift_cap", 0.5);
  if (auto dt = get("sim.dt"))
    cfg.sim_dt_override = parse_quantity(*dt, Dimension::time, "sim.dt");
  cfg.series_samples = static_cast<int>(number("output.series_samples", 200));
  cfg.design_max_evals =
      static_cast<long>(number("design.max_evals", -1));
  cfg.design_restarts = static_cast<int>(number("design.restarts", 0));
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::vector<Diagnostic> validate(const RunConfig& cfg) {
  std::vector<Diagnostic> out;
  static const char* commands[] = {"design-nm", "design-direct", "verify",
                                   "doublewell", "ratio", "sweep"};
  if (std::find_if(std::begin(commands), std::end(commands),
                   [&](const char* c) { return cfg.command == c; }) ==
      std::end(commands))
    out.push_back({Severity::error, "command",
                   "unknown command '" + cfg.command + "'"});

  if (cfg.command != "ratio") {
    if (!(cfg.m1 > 0) || !(cfg.m2 > 0))
      out.push_back({Severity::error, "ion.m1", "ion masses must be positive"});
    if (cfg.command == "design-nm" && cfg.m1 != cfg.m2)
      out.push_back({Severity::error, "ion.m2",
                     "design-nm requires equal masses; use design-direct or "
                     "doublewell for mixed species"});
    if (cfg.command == "doublewell" && cfg.m1 == cfg.m2)
      out.push_back({Severity::error, "ion.m2",
                     "doublewell requires two different species"});
    for (double tf : cfg.t_f)
      if (!(tf > 0))
        out.push_back({Severity::error, "protocol.t_f",
                       "protocol duration must be positive"});

    if ((cfg.command == "design-nm" || cfg.command == "verify" ||
         cfg.command == "sweep" || cfg.command == "design-direct") &&
        cfg.trap_k > 0 && !cfg.t_f.empty()) {
      const double w0 = std::sqrt(cfg.trap_k / cfg.m1);
      for (double tf : cfg.t_f) {
        RotationAnsatz probe(cfg.theta_f, tf,
                             cfg.fixed_coefficients.value_or(
                                 std::array<double, 4>{0, 0, 0, 0}),
                             4);
        if (probe.max_theta_dot_abs(801) > w0) {
          out.push_back({Severity::warning, "protocol.t_f",
                         "inverted effective potential interval: max|theta_dot|"
                         " exceeds the trap frequency at t_f=" +
                             std::to_string(tf) + " us"});
          break;
        }
      }
    }
    const auto pow2 = [](int n) { return n > 0 && (n & (n - 1)) == 0; };
    if (!pow2(cfg.sim_n1) || !pow2(cfg.sim_n2))
      out.push_back({Severity::error, "sim.n1",
                     "grid point counts must be powers of two"});
    if (cfg.sim_margin_sigmas < 6.0)
      out.push_back({Severity::warning, "sim.margin_sigmas",
                     "margin below 6 ground-state widths"});
  } else {
    if (!(cfg.ratio_r > 0))
      out.push_back({Severity::error, "ratio.r", "radius must be positive"});
  }
  return out;
}

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

} // namespace ionrot
