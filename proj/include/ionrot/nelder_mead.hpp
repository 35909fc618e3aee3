// Downhill simplex with the standard coefficient set (reflect 1, expand 2,
// contract 0.5, shrink 0.5).
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ionrot {

struct NelderMeadOptions {
  double initial_step = 1e-3;  // per-coordinate offset of the start simplex
  double ftol_abs = 1e-12;     // stop when the simplex f-spread falls below
  int max_iter = 2000;
  long max_evals = -1;         // <0: unlimited
  int restarts = 0;            // perturbed restarts from the best point
  std::uint64_t seed = 0;      // RNG seed for restart perturbations
};

struct NelderMeadResult {
  std::vector<double> x;
  double fval = 0.0;
  std::vector<double> best_trace; // best-so-far value per iteration
  int iterations = 0;
  long evals = 0;
  bool converged = false;
};

NelderMeadResult
nelder_mead(const std::function<double(std::span<const double>)>& f,
            std::vector<double> x0, const NelderMeadOptions& opts = {});

} // namespace ionrot
