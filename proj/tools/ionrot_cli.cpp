// Batch front-end: parses a run configuration, validates it, dispatches the
// pipeline and writes reproducible data artifacts.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ionrot/config.hpp"
#include "ionrot/errors.hpp"
#include "ionrot/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ionrot: excitation-free two-ion rotation protocols"};
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int workers = 0;
  bool dry_run = false;
  app.add_option("--config", config_path, "run configuration file")
      ->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "optimizer restart seed");
  app.add_option("--workers", workers, "sweep worker bound (0: cpu count)");
  app.add_flag("--dry-run", dry_run, "validate the config and exit");
  CLI11_PARSE(app, argc, argv);

  std::string config_text;
  ionrot::RunConfig cfg;
  try {
    std::ifstream in(config_path);
    if (!in) throw ionrot::ConfigError("cannot open " + config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    config_text = buf.str();
    cfg = ionrot::parse_config_text(config_text);
  } catch (const ionrot::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  cfg.out_dir = out_dir;
  cfg.seed = seed;
  cfg.workers = workers;

  const auto diags = ionrot::validate(cfg);
  bool fatal = false;
  for (const auto& d : diags) {
    std::cerr << (d.severity == ionrot::Severity::error ? "error" : "warning")
              << " [" << d.field << "]: " << d.message << "\n";
    fatal |= d.severity == ionrot::Severity::error;
  }
  if (fatal) return 2;
  if (dry_run) {
    std::cout << "config ok (" << diags.size() << " diagnostics)\n";
    return 0;
  }

  try {
    const auto bundle = ionrot::run(cfg, config_text);
    for (const auto& [k, v] : bundle.summary)
      std::printf("%s = %.17g\n", k.c_str(), v);
    std::printf("manifest: %s\n", bundle.manifest_path.c_str());
  } catch (const ionrot::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ionrot::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
