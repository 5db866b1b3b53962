#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "projlstd/errors.hpp"

namespace projlstd {

/// Stationary distribution of a finite Markov chain: mu^T P = mu^T, sum 1.
struct StationaryDistribution {
  Eigen::VectorXd mu;
};

/// One sampled state/reward path. Regenerable bit-for-bit from its seed.
struct Trajectory {
  std::vector<int> states;
  Eigen::VectorXd rewards;
  std::uint64_t seed = 0;
  bool stationary_start = true;

  std::int64_t length() const { return static_cast<std::int64_t>(states.size()); }
};

/// Finite Markov reward process (P, r, gamma) with declared reward bound.
///
/// Construction validates row-stochasticity, the reward bound, gamma in (0,1)
/// and irreducibility of the support graph; reducible chains are rejected.
/// The chain's period is computed as well: periodic-but-irreducible chains
/// (e.g. the deterministic two-state swap) are accepted as degenerate test
/// fixtures and still have a unique stationary distribution.
class MarkovRewardProcess {
 public:
  MarkovRewardProcess(Eigen::MatrixXd transition, Eigen::VectorXd rewards,
                      double gamma, double r_max);

  int n_states() const { return static_cast<int>(p_.rows()); }
  const Eigen::MatrixXd& transition() const { return p_; }
  const Eigen::VectorXd& rewards() const { return r_; }
  double gamma() const { return gamma_; }
  double r_max() const { return r_max_; }
  double v_max() const { return r_max_ / (1.0 - gamma_); }

  /// gcd of cycle lengths through state 0; 1 means aperiodic.
  int period() const { return period_; }
  bool is_ergodic() const { return period_ == 1; }

 private:
  Eigen::MatrixXd p_;
  Eigen::VectorXd r_;
  double gamma_;
  double r_max_;
  int period_;
};

/// Power iteration on P^T (tolerance 1e-13, cap 1e6 iterations, lazy kernel
/// for periodic chains), dense eigen-solve fallback. Throws ConvergenceError
/// with the residual if both fail.
StationaryDistribution stationary_distribution(const MarkovRewardProcess& mrp);

/// V = (I - gamma P)^{-1} r, the unique fixed point of the Bellman operator.
Eigen::VectorXd exact_value(const MarkovRewardProcess& mrp);

/// T f = r + gamma P f.
Eigen::VectorXd bellman(const MarkovRewardProcess& mrp, const Eigen::VectorXd& f);

/// Multi-step operator via the closed form
///   T^lambda f = (I - lambda gamma P)^{-1} r
///              + (1 - lambda) gamma P (I - lambda gamma P)^{-1} f.
/// lambda = 0 reduces to bellman(); lambda = 1 collapses to exact_value().
Eigen::VectorXd bellman_lambda(const MarkovRewardProcess& mrp, double lambda,
                               const Eigen::VectorXd& f);

/// mu-weighted L2 norm sqrt(sum_x f(x)^2 mu(x)).
double mu_norm(const StationaryDistribution& mu, const Eigen::VectorXd& f);

/// Sample X_1..X_n. X_1 ~ mu when stationary_start, else start_state.
/// Same seed, same trajectory, bit for bit.
Trajectory sample_trajectory(const MarkovRewardProcess& mrp, std::int64_t n,
                             std::uint64_t seed, bool stationary_start,
                             int start_state = 0);

enum class ChainKind { kRing, kRandomErgodic, kChainWalk };
enum class RewardKind { kUnitFirst, kRandomUniform, kExplicit };

struct ChainParams {
  double stay = 0.1;    // ring: self-loop probability
  double noise = 0.1;   // chain_walk: self-loop probability
  double gamma = 0.9;
  double r_max = 1.0;
  RewardKind reward_kind = RewardKind::kUnitFirst;
  Eigen::VectorXd rewards;  // used when reward_kind == kExplicit
};

/// Test-bed chain generators.
///  ring:           state i -> i+1 mod n with prob 1-stay, stays otherwise
///  random_ergodic: rows drawn Dirichlet(1,..,1), all entries > 0
///  chain_walk:     reflecting +-1 walk with self-loop probability `noise`
MarkovRewardProcess make_chain(ChainKind kind, int n_states,
                               const ChainParams& params, std::uint64_t seed);

}  // namespace projlstd
