#include "projlstd/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "projlstd/rng.hpp"

namespace projlstd {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kPowerIterTol = 1e-13;
constexpr std::int64_t kPowerIterCap = 1'000'000;

// Forward/backward reachability from state 0 over the support graph.
bool strongly_connected(const Eigen::MatrixXd& p) {
  const int n = static_cast<int>(p.rows());
  auto reach = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v = 0; v < n; ++v) {
        const double w = transpose ? p(v, u) : p(u, v);
        if (w > 0.0 && !seen[v]) {
          seen[v] = 1;
          ++count;
          q.push(v);
        }
      }
    }
    return count == n;
  };
  return reach(false) && reach(true);
}

// Period of an irreducible chain: gcd over edges (u,v) of level(u)+1-level(v),
// levels from a BFS rooted at state 0. Every cycle through 0 has length
// divisible by the result.
int chain_period(const Eigen::MatrixXd& p) {
  const int n = static_cast<int>(p.rows());
  std::vector<int> level(n, -1);
  std::queue<int> q;
  q.push(0);
  level[0] = 0;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v = 0; v < n; ++v) {
      if (p(u, v) > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      }
    }
  }
  int g = 0;
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (p(u, v) > 0.0) {
        g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
      }
    }
  }
  return g == 0 ? 1 : g;
}

int sample_index(const Eigen::VectorXd& probs, double u) {
  double acc = 0.0;
  int last_positive = 0;
  for (int i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) last_positive = i;
    acc += probs[i];
    if (u < acc) return i;
  }
  return last_positive;  // u landed in the rounding slack at the top
}

}  // namespace

MarkovRewardProcess::MarkovRewardProcess(Eigen::MatrixXd transition,
                                         Eigen::VectorXd rewards, double gamma,
                                         double r_max)
    : p_(std::move(transition)), r_(std::move(rewards)), gamma_(gamma), r_max_(r_max) {
  if (p_.rows() < 1 || p_.rows() != p_.cols()) {
    throw DimensionError("transition matrix must be square and nonempty");
  }
  if (r_.size() != p_.rows()) {
    throw DimensionError("reward vector length must equal the state count");
  }
  if (!(gamma_ >= 0.0 && gamma_ < 1.0)) {
    throw Error("gamma must lie in [0, 1)");
  }
  if (!(r_max_ > 0.0)) {
    throw Error("r_max must be positive");
  }
  if (!p_.allFinite() || !r_.allFinite()) {
    throw Error("transition/reward entries must be finite");
  }
  if (p_.minCoeff() < 0.0) {
    throw Error("transition probabilities must be nonnegative");
  }
  for (int i = 0; i < p_.rows(); ++i) {
    const double row_sum = p_.row(i).sum();
    if (std::abs(row_sum - 1.0) > kRowSumTol) {
      std::ostringstream msg;
      msg << "row " << i << " of P sums to " << row_sum << ", not 1 within 1e-12";
      throw Error(msg.str());
    }
  }
  if (r_.cwiseAbs().maxCoeff() > r_max_ + 1e-12) {
    throw Error("a reward exceeds the declared r_max bound");
  }
  if (!strongly_connected(p_)) {
    throw Error("chain is not irreducible: some state is unreachable");
  }
  period_ = chain_period(p_);
}

StationaryDistribution stationary_distribution(const MarkovRewardProcess& mrp) {
  const Eigen::MatrixXd& p = mrp.transition();
  const int n = mrp.n_states();

  // The lazy kernel (P+I)/2 shares the stationary distribution and removes
  // periodicity, so the iteration converges for any irreducible chain.
  const bool lazy = mrp.period() > 1;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
  auto residual = [&](const Eigen::VectorXd& v) {
    return (p.transpose() * v - v).cwiseAbs().maxCoeff();
  };

  double res = residual(x);
  for (std::int64_t it = 0; it < kPowerIterCap && res > kPowerIterTol; ++it) {
    Eigen::VectorXd next = p.transpose() * x;
    if (lazy) next = 0.5 * (next + x);
    next /= next.sum();
    x = next;
    res = residual(x);
  }
  if (res <= kPowerIterTol) {
    return {std::move(x)};
  }

  // Dense fallback: solve (P^T - I) mu = 0 with the normalization sum mu = 1
  // written into the last row.
  Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[n - 1] = 1.0;
  Eigen::VectorXd mu = a.fullPivLu().solve(rhs);
  const double dense_res = residual(mu);
  if (dense_res > 1e-10 || std::abs(mu.sum() - 1.0) > 1e-10 || mu.minCoeff() < -1e-12) {
    std::ostringstream msg;
    msg << "stationary distribution did not converge: power-iteration residual "
        << res << ", dense-solve residual " << dense_res;
    throw ConvergenceError(msg.str());
  }
  mu = mu.cwiseMax(0.0);
  mu /= mu.sum();
  return {std::move(mu)};
}

Eigen::VectorXd exact_value(const MarkovRewardProcess& mrp) {
  const int n = mrp.n_states();
  const Eigen::MatrixXd a =
      Eigen::MatrixXd::Identity(n, n) - mrp.gamma() * mrp.transition();
  return a.partialPivLu().solve(mrp.rewards());
}

Eigen::VectorXd bellman(const MarkovRewardProcess& mrp, const Eigen::VectorXd& f) {
  if (f.size() != mrp.n_states()) {
    throw DimensionError("bellman: f length must equal the state count");
  }
  return mrp.rewards() + mrp.gamma() * (mrp.transition() * f);
}

Eigen::VectorXd bellman_lambda(const MarkovRewardProcess& mrp, double lambda,
                               const Eigen::VectorXd& f) {
  if (f.size() != mrp.n_states()) {
    throw DimensionError("bellman_lambda: f length must equal the state count");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error("lambda must lie in [0, 1]");
  }
  const int n = mrp.n_states();
  const Eigen::MatrixXd b =
      Eigen::MatrixXd::Identity(n, n) - lambda * mrp.gamma() * mrp.transition();
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
  Eigen::VectorXd out = lu.solve(mrp.rewards());
  if (lambda < 1.0) {
    out += (1.0 - lambda) * mrp.gamma() * (mrp.transition() * lu.solve(f));
  }
  return out;
}

double mu_norm(const StationaryDistribution& mu, const Eigen::VectorXd& f) {
  if (f.size() != mu.mu.size()) {
    throw DimensionError("mu_norm: vector lengths differ");
  }
  return std::sqrt((mu.mu.array() * f.array().square()).sum());
}

Trajectory sample_trajectory(const MarkovRewardProcess& mrp, std::int64_t n,
                             std::uint64_t seed, bool stationary_start,
                             int start_state) {
  if (n < 2) {
    throw Error("trajectory length must be at least 2");
  }
  Rng rng(derive_seed(seed, Stream::kTrajectory));

  Trajectory traj;
  traj.seed = seed;
  traj.stationary_start = stationary_start;
  traj.states.reserve(static_cast<std::size_t>(n));

  int x;
  if (stationary_start) {
    const StationaryDistribution mu = stationary_distribution(mrp);
    x = sample_index(mu.mu, rng.next_double());
  } else {
    if (start_state < 0 || start_state >= mrp.n_states()) {
      throw Error("start_state out of range");
    }
    x = start_state;
  }
  traj.states.push_back(x);
  for (std::int64_t t = 1; t < n; ++t) {
    x = sample_index(mrp.transition().row(x), rng.next_double());
    traj.states.push_back(x);
  }
  traj.rewards.resize(n);
  for (std::int64_t t = 0; t < n; ++t) {
    traj.rewards[t] = mrp.rewards()[traj.states[static_cast<std::size_t>(t)]];
  }
  return traj;
}

namespace {

Eigen::VectorXd build_rewards(const ChainParams& params, int n_states,
                              std::uint64_t seed) {
  switch (params.reward_kind) {
    case RewardKind::kUnitFirst: {
      Eigen::VectorXd r = Eigen::VectorXd::Zero(n_states);
      r[0] = params.r_max;
      return r;
    }
    case RewardKind::kRandomUniform: {
      Rng rng(derive_seed(seed, Stream::kRewards));
      Eigen::VectorXd r(n_states);
      for (int i = 0; i < n_states; ++i) {
        r[i] = params.r_max * (2.0 * rng.next_double() - 1.0);
      }
      return r;
    }
    case RewardKind::kExplicit:
      if (params.rewards.size() != n_states) {
        throw ConfigError("explicit rewards length must equal n_states");
      }
      return params.rewards;
  }
  throw ConfigError("unknown reward kind");
}

}  // namespace

MarkovRewardProcess make_chain(ChainKind kind, int n_states,
                               const ChainParams& params, std::uint64_t seed) {
  if (n_states < 1) {
    throw ConfigError("n_states must be at least 1");
  }
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n_states, n_states);
  switch (kind) {
    case ChainKind::kRing: {
      if (!(params.stay >= 0.0 && params.stay < 1.0)) {
        throw ConfigError("ring stay probability must lie in [0, 1)");
      }
      for (int i = 0; i < n_states; ++i) {
        p(i, i) += params.stay;
        p(i, (i + 1) % n_states) += 1.0 - params.stay;
      }
      break;
    }
    case ChainKind::kRandomErgodic: {
      Rng rng(derive_seed(seed, Stream::kChainRows));
      for (int i = 0; i < n_states; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n_states; ++j) {
          p(i, j) = -std::log(1.0 - rng.next_double());  // Exp(1) => Dirichlet(1) row
          sum += p(i, j);
        }
        p.row(i) /= sum;
      }
      break;
    }
    case ChainKind::kChainWalk: {
      if (!(params.noise >= 0.0 && params.noise < 1.0)) {
        throw ConfigError("chain_walk noise must lie in [0, 1)");
      }
      for (int i = 0; i < n_states; ++i) {
        p(i, i) += params.noise;
        const double move = 1.0 - params.noise;
        if (n_states == 1) {
          p(i, i) += move;
        } else if (i == 0) {
          p(i, i + 1) += move;
        } else if (i == n_states - 1) {
          p(i, i - 1) += move;
        } else {
          p(i, i - 1) += 0.5 * move;
          p(i, i + 1) += 0.5 * move;
        }
      }
      break;
    }
  }
  Eigen::VectorXd r = build_rewards(params, n_states, seed);
  try {
    return MarkovRewardProcess(std::move(p), std::move(r), params.gamma, params.r_max);
  } catch (const Error& e) {
    throw ConfigError(std::string("generated chain rejected: ") + e.what());
  }
}

}  // namespace projlstd
