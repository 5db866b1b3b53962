// projlstd: policy-evaluation experiments with LSTD(lambda), LSTD-RP and
// LSTD(lambda)-RP on finite Markov reward processes.
//
//   projlstd solve|estimate|sweep|bench|verify --config <path> --out <dir>
//            [--seed <u64>] [--jobs <k>] [--suite <name>]
//
// Exit codes: 0 pass, 1 config error, 2 verification failure, 3 runtime failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "projlstd/bench.hpp"
#include "projlstd/config.hpp"

namespace {

int default_jobs() {
  if (const char* env = std::getenv("PROJLSTD_JOBS")) {
    const int jobs = std::atoi(env);
    if (jobs >= 1) return jobs;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LSTD(lambda)-RP policy-evaluation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
  int jobs = default_jobs();
  std::string suite = "all";

  auto add_common = [&](CLI::App* cmd, bool with_jobs) {
    cmd->add_option("--config", config_path, "experiment config JSON")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed_override, "override the master seed");
    if (with_jobs) {
      cmd->add_option("--jobs", jobs, "worker count (env PROJLSTD_JOBS sets the default)");
    }
  };

  CLI::App* solve = app.add_subcommand("solve", "exact model-based quantities and bounds");
  add_common(solve, false);
  CLI::App* estimate = app.add_subcommand("estimate", "run the three estimators per cell");
  add_common(estimate, true);
  CLI::App* sweep = app.add_subcommand("sweep", "factorial sweep with argmin summary");
  add_common(sweep, true);
  CLI::App* bench = app.add_subcommand("bench", "wall-clock comparison of the estimators");
  add_common(bench, false);
  CLI::App* verify = app.add_subcommand("verify", "statistical/deterministic property suites");
  add_common(verify, true);
  verify->add_option("--suite", suite, "jl|contraction|gram_eig|mixing|bounds_cert|all");

  CLI11_PARSE(app, argc, argv);

  try {
    const projlstd::ExperimentConfig cfg = projlstd::load_config(config_path, seed_override);
    const std::string out = !out_dir.empty() ? out_dir : (!cfg.out.empty() ? cfg.out : "out");
    int code = 0;
    if (app.got_subcommand(solve)) {
      code = projlstd::bench::cmd_solve(cfg, out);
    } else if (app.got_subcommand(estimate)) {
      code = projlstd::bench::cmd_estimate(cfg, out, jobs);
    } else if (app.got_subcommand(sweep)) {
      code = projlstd::bench::cmd_sweep(cfg, out, jobs);
    } else if (app.got_subcommand(bench)) {
      code = projlstd::bench::cmd_bench(cfg, out);
    } else if (app.got_subcommand(verify)) {
      code = projlstd::bench::cmd_verify(cfg, out, suite, jobs);
      if (code != 0) std::cerr << "verification failed; see verify.csv\n";
    }
    return code;
  } catch (const projlstd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 3;
  }
}
