#include <CLI11.hpp>

#include <iostream>

#include "aloe/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Run ALOE line-search experiments from a config file."};
  app.set_version_flag("--version", std::string(aloe::kToolVersion));

  std::string config_path;
  std::string out_dir;
  std::int64_t seed = 0;
  int trials = 0;
  int jobs = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "experiment config (docs/config.md)")->required();
  app.add_option("--out", out_dir, "output directory")->required();
  auto* seed_opt = app.add_option("--seed", seed, "override experiment.base_seed")
                       ->check(CLI::NonNegativeNumber);
  auto* trials_opt =
      app.add_option("--trials", trials, "override experiment.trials")->check(CLI::PositiveNumber);
  auto* jobs_opt =
      app.add_option("--jobs", jobs, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet", quiet, "print failures and the exit code only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : aloe::kExitConfig;
  }

  aloe::RunOptions options;
  if (*seed_opt) options.seed = static_cast<std::uint64_t>(seed);
  if (*trials_opt) options.trials = trials;
  if (*jobs_opt) options.jobs = jobs;
  options.quiet = quiet;
  options.log = &std::cout;
  return aloe::run_config_file(config_path, out_dir, options);
}
