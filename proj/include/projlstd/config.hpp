#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "projlstd/bounds.hpp"
#include "projlstd/chain.hpp"
#include "projlstd/features.hpp"

namespace projlstd {

struct ChainSpec {
  std::string kind = "ring";  // ring | random_ergodic | chain_walk
  int n_states = 5;
  double stay = 0.1;
  double noise = 0.1;
  double gamma = 0.9;
  double r_max = 1.0;
  std::string reward_kind = "unit_first";  // unit_first | random_uniform | explicit
  std::vector<double> rewards;
  std::uint64_t seed = 0;
};

struct FeatureSpec {
  std::string kind = "one_hot";  // one_hot | random_bounded | fourier_on_index
  int D = 5;
  double L = 1.0;
  std::uint64_t seed = 0;
};

struct ProjectionSpec {
  int d = 3;
  std::uint64_t seed = 0;
};

struct EstimatorGrid {
  std::vector<double> lambdas = {0.0};
  std::vector<std::int64_t> ns = {1000};
  std::vector<int> ds;  // empty: use projection.d
};

struct BenchSpec {
  int repeats = 5;
  int warmup = 1;
};

struct VerifySpec {
  // jl (Fact 1)
  std::vector<std::pair<int, double>> jl_cases = {{64, 0.5}, {128, 0.3}};
  int jl_vectors = 10000;
  int jl_draws = 50;
  int jl_ambient = 256;
  // inner products (Fact 2)
  int fact2_vectors = 100;
  int fact2_draws = 400;
  double fact2_eps = 0.5;
  double fact2_delta = 0.05;
  // contraction (Lemma 2)
  int contraction_pairs = 1000;
  std::vector<double> contraction_lambdas = {0.0, 0.25, 0.5, 0.75, 1.0};
  // gram eigenvalue relation (Fact 3)
  int gram_draws = 1000;
  int gram_D = 1024;
  int gram_d = 16;
  // mixing average concentration (Lemma 7)
  int mixing_trajectories = 500;
  std::int64_t mixing_n = 10000;
  // estimation-bound certification + deterministic approximation inequality
  int cert_runs = 200;
  std::int64_t cert_n = 1000;
  int cert_d = 159;
  int cert_D = 256;
  double cert_lambda = 0.5;
};

struct ExperimentConfig {
  ChainSpec chain;
  FeatureSpec features;
  ProjectionSpec projection;
  EstimatorGrid grid;
  double delta = 0.1;
  MixingParams mixing;
  std::vector<std::uint64_t> trajectory_seeds = {1};
  bool stationary_start = true;
  std::string out;  // optional; the CLI --out flag takes precedence
  std::uint64_t master_seed = 0;
  std::int64_t n0_cap = 1'000'000'000;
  BenchSpec bench;
  VerifySpec verify;
};

/// Parse + resolve + validate a config file. Derives any seeds that were left
/// unspecified from the master seed, so the resolved config is fully
/// reproducible. All validation failures are collected into one ConfigError.
ExperimentConfig load_config(const std::string& path,
                             std::optional<std::uint64_t> master_seed_override = {});

/// Validation used by load_config; throws ConfigError listing every violation.
void validate_config(const ExperimentConfig& config);

/// Canonical JSON text of the resolved config (stable key order).
std::string resolved_config_json(const ExperimentConfig& config);

/// FNV-1a hash of the canonical JSON, as fixed-width hex.
std::string config_hash(const ExperimentConfig& config);

// Construction helpers shared by the harness commands.
MarkovRewardProcess build_chain(const ChainSpec& spec);
FeatureMap build_features(const FeatureSpec& spec, int n_states);

}  // namespace projlstd
