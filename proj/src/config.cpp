#include "projlstd/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "projlstd/rng.hpp"

namespace projlstd {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Seed-derivation tags for config fields left unspecified.
constexpr std::uint64_t kChainSeedTag = 101;
constexpr std::uint64_t kFeatureSeedTag = 102;
constexpr std::uint64_t kProjectionSeedTag = 103;
constexpr std::uint64_t kTrajectorySeedTag = 104;

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_chain(const json& j, ChainSpec& spec, bool& seed_given) {
  read_if(j, "kind", spec.kind);
  read_if(j, "n_states", spec.n_states);
  if (j.contains("params")) {
    const json& p = j.at("params");
    read_if(p, "stay", spec.stay);
    read_if(p, "noise", spec.noise);
  }
  read_if(j, "gamma", spec.gamma);
  read_if(j, "r_max", spec.r_max);
  if (j.contains("rewards")) {
    spec.rewards = j.at("rewards").get<std::vector<double>>();
    spec.reward_kind = "explicit";
  } else {
    read_if(j, "reward_kind", spec.reward_kind);
  }
  seed_given = j.contains("seed");
  if (seed_given) spec.seed = j.at("seed").get<std::uint64_t>();
}

}  // namespace

ExperimentConfig load_config(const std::string& path,
                             std::optional<std::uint64_t> master_seed_override) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  bool chain_seed_given = false;
  bool feature_seed_given = false;
  bool projection_seed_given = false;
  bool trajectory_seeds_given = false;
  int n_seeds = 1;

  try {
    read_if(j, "master_seed", cfg.master_seed);
    if (master_seed_override) cfg.master_seed = *master_seed_override;

    if (j.contains("chain")) parse_chain(j.at("chain"), cfg.chain, chain_seed_given);
    if (j.contains("features")) {
      const json& f = j.at("features");
      read_if(f, "kind", cfg.features.kind);
      read_if(f, "D", cfg.features.D);
      read_if(f, "L", cfg.features.L);
      feature_seed_given = f.contains("seed");
      if (feature_seed_given) cfg.features.seed = f.at("seed").get<std::uint64_t>();
    }
    if (j.contains("projection")) {
      const json& p = j.at("projection");
      read_if(p, "d", cfg.projection.d);
      projection_seed_given = p.contains("seed");
      if (projection_seed_given) cfg.projection.seed = p.at("seed").get<std::uint64_t>();
    }
    if (j.contains("estimators")) {
      const json& g = j.at("estimators");
      read_if(g, "lambdas", cfg.grid.lambdas);
      read_if(g, "ns", cfg.grid.ns);
      read_if(g, "ds", cfg.grid.ds);
    }
    read_if(j, "delta", cfg.delta);
    if (j.contains("mixing")) {
      const json& m = j.at("mixing");
      read_if(m, "beta0", cfg.mixing.beta0);
      read_if(m, "beta1", cfg.mixing.beta1);
      read_if(m, "kappa", cfg.mixing.kappa);
    }
    trajectory_seeds_given = j.contains("trajectory_seeds");
    if (trajectory_seeds_given) {
      cfg.trajectory_seeds = j.at("trajectory_seeds").get<std::vector<std::uint64_t>>();
    }
    read_if(j, "n_seeds", n_seeds);
    read_if(j, "stationary_start", cfg.stationary_start);
    read_if(j, "out", cfg.out);
    read_if(j, "n0_cap", cfg.n0_cap);
    if (j.contains("bench")) {
      const json& b = j.at("bench");
      read_if(b, "repeats", cfg.bench.repeats);
      read_if(b, "warmup", cfg.bench.warmup);
    }
    if (j.contains("verify")) {
      const json& v = j.at("verify");
      if (v.contains("jl_cases")) {
        cfg.verify.jl_cases.clear();
        for (const auto& c : v.at("jl_cases")) {
          cfg.verify.jl_cases.emplace_back(c.at(0).get<int>(), c.at(1).get<double>());
        }
      }
      read_if(v, "jl_vectors", cfg.verify.jl_vectors);
      read_if(v, "jl_draws", cfg.verify.jl_draws);
      read_if(v, "jl_ambient", cfg.verify.jl_ambient);
      read_if(v, "fact2_vectors", cfg.verify.fact2_vectors);
      read_if(v, "fact2_draws", cfg.verify.fact2_draws);
      read_if(v, "fact2_eps", cfg.verify.fact2_eps);
      read_if(v, "fact2_delta", cfg.verify.fact2_delta);
      read_if(v, "contraction_pairs", cfg.verify.contraction_pairs);
      read_if(v, "contraction_lambdas", cfg.verify.contraction_lambdas);
      read_if(v, "gram_draws", cfg.verify.gram_draws);
      read_if(v, "gram_D", cfg.verify.gram_D);
      read_if(v, "gram_d", cfg.verify.gram_d);
      read_if(v, "mixing_trajectories", cfg.verify.mixing_trajectories);
      read_if(v, "mixing_n", cfg.verify.mixing_n);
      read_if(v, "cert_runs", cfg.verify.cert_runs);
      read_if(v, "cert_n", cfg.verify.cert_n);
      read_if(v, "cert_d", cfg.verify.cert_d);
      read_if(v, "cert_D", cfg.verify.cert_D);
      read_if(v, "cert_lambda", cfg.verify.cert_lambda);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }

  // Resolve unspecified seeds from the master seed.
  if (!chain_seed_given) cfg.chain.seed = derive_seed(cfg.master_seed, kChainSeedTag);
  if (!feature_seed_given) cfg.features.seed = derive_seed(cfg.master_seed, kFeatureSeedTag);
  if (!projection_seed_given) {
    cfg.projection.seed = derive_seed(cfg.master_seed, kProjectionSeedTag);
  }
  if (!trajectory_seeds_given) {
    cfg.trajectory_seeds.clear();
    for (int i = 0; i < n_seeds; ++i) {
      cfg.trajectory_seeds.push_back(derive_seed(cfg.master_seed, kTrajectorySeedTag,
                                                 static_cast<std::uint64_t>(i)));
    }
  }

  validate_config(cfg);
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  std::vector<std::string> problems;
  auto complain = [&](const std::string& msg) { problems.push_back(msg); };

  if (cfg.chain.kind != "ring" && cfg.chain.kind != "random_ergodic" &&
      cfg.chain.kind != "chain_walk") {
    complain("chain.kind must be ring, random_ergodic or chain_walk");
  }
  if (cfg.chain.n_states < 1) complain("chain.n_states must be >= 1");
  if (!(cfg.chain.gamma >= 0.0 && cfg.chain.gamma < 1.0)) {
    complain("chain.gamma must lie in [0, 1)");
  }
  if (!(cfg.chain.r_max > 0.0)) complain("chain.r_max must be positive");
  if (cfg.chain.reward_kind != "unit_first" && cfg.chain.reward_kind != "random_uniform" &&
      cfg.chain.reward_kind != "explicit") {
    complain("chain.reward_kind must be unit_first, random_uniform or explicit");
  }
  if (cfg.chain.reward_kind == "explicit" &&
      static_cast<int>(cfg.chain.rewards.size()) != cfg.chain.n_states) {
    complain("chain.rewards length must equal chain.n_states");
  }
  if (!(cfg.chain.stay >= 0.0 && cfg.chain.stay < 1.0)) {
    complain("chain.params.stay must lie in [0, 1)");
  }
  if (!(cfg.chain.noise >= 0.0 && cfg.chain.noise < 1.0)) {
    complain("chain.params.noise must lie in [0, 1)");
  }

  if (cfg.features.kind != "one_hot" && cfg.features.kind != "random_bounded" &&
      cfg.features.kind != "fourier_on_index") {
    complain("features.kind must be one_hot, random_bounded or fourier_on_index");
  }
  if (cfg.features.D < 1) complain("features.D must be >= 1");
  if (cfg.features.D > cfg.chain.n_states) {
    complain("features.D must not exceed chain.n_states (full column rank)");
  }
  if (!(cfg.features.L > 0.0)) complain("features.L must be positive");

  if (cfg.projection.d < 1) complain("projection.d must be >= 1");
  for (int d : cfg.grid.ds) {
    if (d < 1) complain("estimators.ds entries must be >= 1");
    if (d > cfg.features.D) complain("estimators.ds entries must not exceed features.D");
  }
  if (cfg.projection.d > cfg.features.D) {
    complain("projection.d must not exceed features.D");
  }
  for (double lam : cfg.grid.lambdas) {
    if (!(lam >= 0.0 && lam <= 1.0)) complain("estimators.lambdas must lie in [0, 1]");
  }
  for (std::int64_t n : cfg.grid.ns) {
    if (n < 2) complain("estimators.ns entries must be >= 2");
  }
  if (cfg.grid.lambdas.empty()) complain("estimators.lambdas must be nonempty");
  if (cfg.grid.ns.empty()) complain("estimators.ns must be nonempty");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) complain("delta must lie in (0, 1)");
  if (!(cfg.mixing.beta0 > 0.0 && cfg.mixing.beta1 > 0.0 && cfg.mixing.kappa > 0.0)) {
    complain("mixing parameters must be strictly positive");
  }
  if (cfg.trajectory_seeds.empty()) complain("trajectory_seeds must be nonempty");
  if (cfg.n0_cap < 2) complain("n0_cap must be >= 2");
  if (cfg.bench.repeats < 1) complain("bench.repeats must be >= 1");

  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "config rejected with " << problems.size() << " problem(s):";
    for (const auto& p : problems) msg << "\n  - " << p;
    throw ConfigError(msg.str());
  }
}

std::string resolved_config_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["master_seed"] = cfg.master_seed;
  j["chain"] = {{"kind", cfg.chain.kind},
                {"n_states", cfg.chain.n_states},
                {"params", {{"stay", cfg.chain.stay}, {"noise", cfg.chain.noise}}},
                {"gamma", cfg.chain.gamma},
                {"r_max", cfg.chain.r_max},
                {"reward_kind", cfg.chain.reward_kind},
                {"seed", cfg.chain.seed}};
  if (cfg.chain.reward_kind == "explicit") j["chain"]["rewards"] = cfg.chain.rewards;
  j["features"] = {{"kind", cfg.features.kind},
                   {"D", cfg.features.D},
                   {"L", cfg.features.L},
                   {"seed", cfg.features.seed}};
  j["projection"] = {{"d", cfg.projection.d}, {"seed", cfg.projection.seed}};
  j["estimators"] = {{"lambdas", cfg.grid.lambdas}, {"ns", cfg.grid.ns}, {"ds", cfg.grid.ds}};
  j["delta"] = cfg.delta;
  j["mixing"] = {{"beta0", cfg.mixing.beta0},
                 {"beta1", cfg.mixing.beta1},
                 {"kappa", cfg.mixing.kappa}};
  j["trajectory_seeds"] = cfg.trajectory_seeds;
  j["stationary_start"] = cfg.stationary_start;
  j["n0_cap"] = cfg.n0_cap;
  j["bench"] = {{"repeats", cfg.bench.repeats}, {"warmup", cfg.bench.warmup}};
  return j.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = resolved_config_json(cfg);
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buf);
}

MarkovRewardProcess build_chain(const ChainSpec& spec) {
  ChainParams params;
  params.stay = spec.stay;
  params.noise = spec.noise;
  params.gamma = spec.gamma;
  params.r_max = spec.r_max;
  if (spec.reward_kind == "unit_first") {
    params.reward_kind = RewardKind::kUnitFirst;
  } else if (spec.reward_kind == "random_uniform") {
    params.reward_kind = RewardKind::kRandomUniform;
  } else {
    params.reward_kind = RewardKind::kExplicit;
    params.rewards = Eigen::Map<const Eigen::VectorXd>(spec.rewards.data(),
                                                       static_cast<int>(spec.rewards.size()));
  }
  ChainKind kind = ChainKind::kRing;
  if (spec.kind == "random_ergodic") kind = ChainKind::kRandomErgodic;
  if (spec.kind == "chain_walk") kind = ChainKind::kChainWalk;
  return make_chain(kind, spec.n_states, params, spec.seed);
}

FeatureMap build_features(const FeatureSpec& spec, int n_states) {
  FeatureKind kind = FeatureKind::kOneHot;
  if (spec.kind == "random_bounded") kind = FeatureKind::kRandomBounded;
  if (spec.kind == "fourier_on_index") kind = FeatureKind::kFourierOnIndex;
  return make_features(kind, n_states, spec.D, spec.L, spec.seed);
}

}  // namespace projlstd
