#include "ionrot/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace ionrot {

namespace {

struct Simplex {
  std::vector<std::vector<double>> x;
  std::vector<double> f;
};

NelderMeadResult run_once(const std::function<double(std::span<const double>)>& fn,
                          const std::vector<double>& x0, double step,
                          const NelderMeadOptions& opts, long& evals) {
  const std::size_t n = x0.size();
  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& p) {
    ++evals;
    return fn(std::span<const double>(p));
  };

  Simplex s;
  s.x.assign(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) s.x[i + 1][i] += step;
  s.f.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) s.f[i] = eval(s.x[i]);

  std::vector<std::size_t> order(n + 1);
  double best_so_far = *std::min_element(s.f.begin(), s.f.end());

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (opts.max_evals >= 0 && evals >= opts.max_evals) break;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return s.f[a] < s.f[b]; });
    const std::size_t lo = order[0], hi = order[n], nhi = order[n - 1];

    best_so_far = std::min(best_so_far, s.f[lo]);
    res.best_trace.push_back(best_so_far);
    res.iterations = iter + 1;
    if (s.f[hi] - s.f[lo] < opts.ftol_abs) {
      res.converged = true;
      break;
    }

    // centroid of all but the worst vertex
    std::vector<double> cen(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == hi) continue;
      for (std::size_t j = 0; j < n; ++j) cen[j] += s.x[i][j];
    }
    for (double& c : cen) c /= static_cast<double>(n);

    auto blend = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j)
        p[j] = cen[j] + t * (s.x[hi][j] - cen[j]);
      return p;
    };

    auto xr = blend(-1.0);
    const double fr = eval(xr);
    if (fr < s.f[lo]) {
      auto xe = blend(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        s.x[hi] = std::move(xe);
        s.f[hi] = fe;
      } else {
        s.x[hi] = std::move(xr);
        s.f[hi] = fr;
      }
    } else if (fr < s.f[nhi]) {
      s.x[hi] = std::move(xr);
      s.f[hi] = fr;
    } else {
      const bool outside = fr < s.f[hi];
      auto xc = blend(outside ? -0.5 : 0.5);
      const double fc = eval(xc);
      if (fc < std::min(fr, s.f[hi])) {
        s.x[hi] = std::move(xc);
        s.f[hi] = fc;
      } else {
        // shrink toward the best vertex
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == lo) continue;
          for (std::size_t j = 0; j < n; ++j)
            s.x[i][j] = s.x[lo][j] + 0.5 * (s.x[i][j] - s.x[lo][j]);
          s.f[i] = eval(s.x[i]);
        }
      }
    }
  }

  const std::size_t lo = static_cast<std::size_t>(
      std::min_element(s.f.begin(), s.f.end()) - s.f.begin());
  res.x = s.x[lo];
  res.fval = s.f[lo];
  res.best_trace.push_back(std::min(best_so_far, res.fval));
  return res;
}

} // namespace

NelderMeadResult
nelder_mead(const std::function<double(std::span<const double>)>& f,
            std::vector<double> x0, const NelderMeadOptions& opts) {
  long evals = 0;
  NelderMeadResult best = run_once(f, x0, opts.initial_step, opts, evals);

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int r = 0; r < opts.restarts; ++r) {
    std::vector<double> xs = best.x;
    for (double& v : xs) v += opts.initial_step * unit(rng);
    NelderMeadResult cand = run_once(f, xs, opts.initial_step, opts, evals);
    // keep a single monotone best-so-far trace across restarts
    double floor = best.best_trace.back();
    for (double& v : cand.best_trace) {
      v = std::min(v, floor);
      floor = v;
    }
    best.best_trace.insert(best.best_trace.end(), cand.best_trace.begin(),
                           cand.best_trace.end());
    best.iterations += cand.iterations;
    if (cand.fval < best.fval) {
      best.fval = cand.fval;
      best.x = cand.x;
      best.converged = cand.converged;
    }
  }
  best.evals = evals;
  return best;
}

} // namespace ionrot
