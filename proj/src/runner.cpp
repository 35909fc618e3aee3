#include "ionrot/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "ionrot/csv.hpp"
#include "ionrot/doublewell.hpp"
#include "ionrot/errors.hpp"
#include "ionrot/quantum_verifier.hpp"
#include "ionrot/sta_designer.hpp"

namespace ionrot {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

SimConfig sim_config_from(const RunConfig& cfg) {
  SimConfig sim;
  sim.n1 = cfg.sim_n1;
  sim.n2 = cfg.sim_n2;
  sim.margin_sigmas = cfg.sim_margin_sigmas;
  sim.drift_cap = cfg.sim_drift_cap;
  sim.dt_override = cfg.sim_dt_override;
  sim.time_samples = std::max(2, cfg.series_samples);
  return sim;
}

DesignOptions design_options_from(const RunConfig& cfg) {
  DesignOptions opts;
  opts.max_evals = cfg.design_max_evals;
  opts.restarts = cfg.design_restarts;
  opts.seed = cfg.seed;
  return opts;
}

std::array<double, 4> coefficients_from(const RunConfig& cfg) {
  return cfg.fixed_coefficients.value_or(std::array<double, 4>{0, 0, 0, 0});
}

void write_observables_csv(const std::string& path, const Observables& obs) {
  write_csv(path, {{"t", "us", "quantum-verifier", obs.t},
                   {"norm", "1", "quantum-verifier", obs.norm},
                   {"energy", "u*um^2/us^2", "quantum-verifier", obs.energy},
                   {"mean_s1", "um", "quantum-verifier", obs.mean_s1},
                   {"mean_s2", "um", "quantum-verifier", obs.mean_s2}});
}

void write_trace_csv(const std::string& path, const std::vector<double>& trace,
                     const std::string& unit) {
  std::vector<double> iter(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) iter[i] = double(i);
  write_csv(path, {{"iteration", "1", "sta-designer", iter},
                   {"best_objective", unit, "sta-designer", trace}});
}

// Auxiliary time series of the equal-ion design, for reproduction plots.
void write_equal_ion_series(const std::string& path, const IonPair& ions,
                            double omega0, const RotationAnsatz& ansatz,
                            int samples) {
  auto [plus, minus] = equal_ion_drives(ions, omega0, ansatz);
  std::vector<double> ts(samples + 1);
  for (int i = 0; i <= samples; ++i) ts[i] = ansatz.t_f() * i / samples;
  const auto trj_p = solve_auxiliary(plus, ansatz.t_f(), ts);
  const auto trj_m = solve_auxiliary(minus, ansatz.t_f(), ts);
  std::vector<double> th(ts.size()), td(ts.size()), w2(ts.size());
  std::vector<double> bp(ts.size()), bdp(ts.size()), ap(ts.size()),
      adp(ts.size()), bm(ts.size()), bdm(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    th[i] = ansatz.theta(ts[i]);
    td[i] = ansatz.theta_dot(ts[i]);
    w2[i] = ansatz.effective_frequency_sq(omega0, ts[i]);
    bp[i] = trj_p.states[i].b;
    bdp[i] = trj_p.states[i].b_dot;
    ap[i] = trj_p.states[i].alpha;
    adp[i] = trj_p.states[i].alpha_dot;
    bm[i] = trj_m.states[i].b;
    bdm[i] = trj_m.states[i].b_dot;
  }
  write_csv(path, {{"t", "us", "rotation-ansatz", ts},
                   {"theta", "rad", "rotation-ansatz", th},
                   {"theta_dot", "rad/us", "rotation-ansatz", td},
                   {"omega_sq", "rad^2/us^2", "rotation-ansatz", w2},
                   {"b_plus", "1", "sta-designer", bp},
                   {"b_dot_plus", "1/us", "sta-designer", bdp},
                   {"alpha_plus", "sqrt(u)*um", "sta-designer", ap},
                   {"alpha_dot_plus", "sqrt(u)*um/us", "sta-designer", adp},
                   {"b_minus", "1", "sta-designer", bm},
                   {"b_dot_minus", "1/us", "sta-designer", bdm}});
}

} // namespace

ResultBundle run(const RunConfig& cfg, const std::string& config_text) {
  Timer timer;
  ResultBundle bundle;
  fs::create_directories(cfg.out_dir);
  auto out_path = [&](const std::string& name) {
    const std::string p = (fs::path(cfg.out_dir) / name).string();
    bundle.files.push_back(p);
    return p;
  };

  const IonPair ions{cfg.m1, cfg.m2};
  json summary;

  if (cfg.command == "ratio") {
    const double r = magnetic_electric_ratio(cfg.ratio_r, cfg.ratio_theta_dot);
    bundle.summary["magnetic_electric_ratio"] = r;
  } else if (cfg.command == "design-nm") {
    const double omega0 = std::sqrt(cfg.trap_k / cfg.m1);
    const double tf = cfg.t_f.front();
    DesignResult res;
    if (cfg.fixed_coefficients) {
      // pinned coefficients: evaluate, no optimisation
      res.coefficients = *cfg.fixed_coefficients;
      RotationAnsatz pinned(cfg.theta_f, tf, res.coefficients, 4);
      std::array<double, 2> energies{};
      res.objective = equal_ion_objective(ions, omega0, pinned, &energies);
      res.mode_energies_final = energies;
      res.trace = {res.objective};
      res.converged = true;
      res.evals = 1;
    } else {
      res = design_equal_ions(ions, omega0, tf, cfg.theta_f, cfg.n_free,
                              design_options_from(cfg));
    }
    RotationAnsatz best(cfg.theta_f, tf, res.coefficients, 4);
    write_trace_csv(out_path("design_trace.csv"), res.trace, "u*um^2/us^2");
    write_equal_ion_series(out_path("aux_series.csv"), ions, omega0, best,
                           std::max(2, cfg.series_samples));
    bundle.summary["objective"] = res.objective;
    bundle.summary["objective_quanta"] =
        res.objective / (internal::hbar * omega0);
    for (int i = 0; i < 4; ++i)
      bundle.summary["c" + std::to_string(i + 3)] = res.coefficients[i];
    bundle.summary["evals"] = double(res.evals);
    bundle.summary["converged"] = res.converged ? 1.0 : 0.0;
  } else if (cfg.command == "design-direct") {
    const RigidHarmonicTrap trap{cfg.trap_k};
    const double tf = cfg.t_f.front();
    const double omega1 = std::sqrt(cfg.trap_k / cfg.m1);
    const auto res =
        design_direct(ions, trap, tf, cfg.theta_f, cfg.n_free,
                      sim_config_from(cfg), design_options_from(cfg));
    write_trace_csv(out_path("design_trace.csv"), res.trace, "u*um^2/us^2");
    bundle.summary["excess_energy"] = res.objective;
    bundle.summary["excess_quanta"] =
        res.objective / (internal::hbar * omega1);
    for (int i = 0; i < 4; ++i)
      bundle.summary["c" + std::to_string(i + 3)] = res.coefficients[i];
    bundle.summary["evals"] = double(res.evals);
  } else if (cfg.command == "verify") {
    const RigidHarmonicTrap trap{cfg.trap_k};
    const double tf = cfg.t_f.front();
    const double omega1 = std::sqrt(cfg.trap_k / cfg.m1);
    RotationAnsatz protocol(cfg.theta_f, tf, coefficients_from(cfg), 4);
    PotentialModel model = PotentialModel::rigid(
        trap, ions, [protocol](double t) { return protocol.theta_dot(t); });
    const SimConfig sim = sim_config_from(cfg);
    const Grid2D grid = make_grid(model, protocol, sim);
    const auto gs = ground_state(model, grid, sim);
    const auto run = propagate(model, gs.psi, protocol, sim);
    write_observables_csv(out_path("observables.csv"), run.obs);
    if (cfg.raw.count("output.dump_wavefunction"))
      dump_wavefunction(run.psi, out_path("psi_final.bin"),
                        out_path("psi_final.json"));
    bundle.summary["ground_energy"] = gs.energy;
    bundle.summary["energy_initial"] = run.energy_initial;
    bundle.summary["energy_final"] = run.energy_final;
    bundle.summary["excess_energy"] = run.excess_energy;
    bundle.summary["excess_quanta"] =
        run.excess_energy / (internal::hbar * omega1);
    bundle.summary["steps"] = double(run.steps);
    bundle.summary["norm_drift"] = run.norm_drift;
  } else if (cfg.command == "doublewell") {
    const DoubleWellConfig dw{cfg.dw_mw2, cfg.dw_beta};
    const double tf = cfg.t_f.front();
    const auto res = design_doublewell(ions, dw, tf, cfg.theta_f,
                                       std::min(cfg.n_free, 2),
                                       design_options_from(cfg));
    RotationAnsatz best(cfg.theta_f, tf, res.coefficients, 4);
    DoubleWellTrack track(dw, ions, best);
    const auto series =
        sample_doublewell_series(track, std::max(2, cfg.series_samples));
    write_csv(out_path("doublewell_series.csv"),
              {{"t", "us", "doublewell-designer", series.t},
               {"d", "um", "doublewell-designer", series.d},
               {"s0", "um", "doublewell-designer", series.s0},
               {"gamma", "u*um/us^2", "doublewell-designer", series.gamma},
               {"omega_plus", "rad/us", "doublewell-designer",
                series.omega_plus},
               {"omega_minus", "rad/us", "doublewell-designer",
                series.omega_minus}});
    write_trace_csv(out_path("design_trace.csv"), res.trace, "dE/E0");
    bundle.summary["relative_excitation"] = res.objective;
    for (int i = 0; i < 4; ++i)
      bundle.summary["c" + std::to_string(i + 3)] = res.coefficients[i];
  } else if (cfg.command == "sweep") {
    const double omega1 = std::sqrt(cfg.trap_k / cfg.m1);
    std::vector<int> nfs = cfg.sweep_n_free;
    if (nfs.empty()) nfs = {0, 1, 2, 3, 4};
    const bool equal = cfg.m1 == cfg.m2;
    struct Cell {
      double excess = 0.0;
    };
    std::vector<std::vector<Cell>> table(cfg.t_f.size(),
                                         std::vector<Cell>(nfs.size()));
    std::mutex mtx;
    std::size_t next = 0;
    const std::size_t total = cfg.t_f.size();
    auto worker = [&]() {
      for (;;) {
        std::size_t idx;
        {
          std::lock_guard<std::mutex> lock(mtx);
          if (next >= total) return;
          idx = next++;
        }
        const double tf = cfg.t_f[idx];
        for (std::size_t j = 0; j < nfs.size(); ++j) {
          const RigidHarmonicTrap trap{cfg.trap_k};
          std::array<double, 4> c{0, 0, 0, 0};
          if (nfs[j] > 0) {
            if (equal) {
              auto res = design_equal_ions(ions, omega1, tf, cfg.theta_f,
                                           nfs[j], design_options_from(cfg));
              c = res.coefficients;
            } else {
              auto res =
                  design_direct(ions, trap, tf, cfg.theta_f, nfs[j],
                                sim_config_from(cfg), design_options_from(cfg));
              c = res.coefficients;
            }
          }
          RotationAnsatz protocol(cfg.theta_f, tf, c, 4);
          PotentialModel model = PotentialModel::rigid(
              trap, ions,
              [protocol](double t) { return protocol.theta_dot(t); });
          const SimConfig sim = sim_config_from(cfg);
          const Grid2D grid = make_grid(model, protocol, sim);
          const auto gs = ground_state(model, grid, sim);
          const auto run = propagate(model, gs.psi, protocol, sim);
          table[idx][j].excess = run.excess_energy;
        }
      }
    };
    int n_workers = cfg.workers > 0
                        ? cfg.workers
                        : int(std::thread::hardware_concurrency());
    n_workers = std::max(1, std::min<int>(n_workers, int(total)));
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::vector<CsvColumn> cols;
    std::vector<double> tfs(cfg.t_f.begin(), cfg.t_f.end());
    cols.push_back({"t_f", "us", "cli", tfs});
    for (std::size_t j = 0; j < nfs.size(); ++j) {
      std::vector<double> col(total);
      for (std::size_t i = 0; i < total; ++i)
        col[i] = table[i][j].excess / (internal::hbar * omega1);
      cols.push_back({"excess_quanta_nfree" + std::to_string(nfs[j]),
                      "hbar*omega1", "quantum-verifier", col});
    }
    write_csv(out_path("sweep.csv"), cols);
  } else {
    throw ConfigError("unknown command: " + cfg.command);
  }

  // manifest: config echo, hash, summary, timings (timestamps live only here)
  json manifest;
  manifest["artifact"] = "ionrot";
  manifest["version"] = "1.0.0";
  manifest["config_text"] = config_text;
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                static_cast<unsigned long long>(fnv1a_hash(config_text)));
  manifest["config_hash"] = hash_hex;
  manifest["seed"] = cfg.seed;
  manifest["elapsed_seconds"] = timer.seconds();
  manifest["written"] = bundle.files;
  for (const auto& [k, v] : bundle.summary) summary[k] = v;
  manifest["summary"] = summary;

  bundle.manifest_path = (fs::path(cfg.out_dir) / "manifest.json").string();
  std::ofstream mout(bundle.manifest_path, std::ios::binary);
  mout << manifest.dump(2) << "\n";
  return bundle;
}

} // namespace ionrot
