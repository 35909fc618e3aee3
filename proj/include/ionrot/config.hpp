// Flat key-value run configuration with dotted sections.  Physical fields
// carry an explicit unit suffix ("trap.frequency = 1.41 MHz"); unsuffixed
// numbers are accepted only for dimensionless fields.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ionrot/constants.hpp"

namespace ionrot {

enum class Severity { warning, error };

struct Diagnostic {
  Severity severity;
  std::string field;
  std::string message;
};

struct RunConfig {
  std::string command; // design-nm | design-direct | verify | doublewell | ratio | sweep
  std::map<std::string, std::string> raw; // canonical key -> value text

  // parsed physical values, internal units
  double m1 = 0, m2 = 0;
  double trap_k = 0;          // from trap.frequency (for ion 1) or trap.k
  double theta_f = 0;
  std::vector<double> t_f;    // one entry unless sweeping
  int n_free = 4;
  std::optional<std::array<double, 4>> fixed_coefficients;
  std::vector<int> sweep_n_free; // sweep command: n_free set

  double dw_mw2 = 0, dw_beta = 0; // doublewell command
  double ratio_r = 0, ratio_theta_dot = 0; // ratio command

  int sim_n1 = 256, sim_n2 = 256;
  double sim_margin_sigmas = 6.0;
  double sim_drift_cap = 0.5;
  double sim_dt_override = 0.0;
  int series_samples = 200;
  long design_max_evals = -1;
  int design_restarts = 0;

  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int workers = 0; // 0: logical CPU count
};

// Parses without validating physics; syntax errors throw ConfigError.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Unit checks, regime warnings, grid pre-checks.  Never throws.
std::vector<Diagnostic> validate(const RunConfig& cfg);

// "<number> <unit>" with the unit resolved against the dimension's table.
double parse_quantity(const std::string& text, Dimension dim,
                      const std::string& field);

std::uint64_t fnv1a_hash(const std::string& text);

} // namespace ionrot
