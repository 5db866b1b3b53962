#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "projlstd/chain.hpp"
#include "projlstd/features.hpp"
#include "projlstd/rp.hpp"

namespace projlstd {

enum class SolveKind { kDirect, kPseudoInverse };

const char* to_string(SolveKind kind);

/// Sample-based estimator output: the averaged system, its solution and the
/// solve diagnostics.
struct EstimatorSolution {
  Eigen::MatrixXd a_hat;
  Eigen::VectorXd b_hat;
  Eigen::VectorXd theta;
  SolveKind solve_kind = SolveKind::kDirect;
  double condition_estimate = 0.0;
  std::int64_t n_transitions = 0;
};

/// Model-based fixed point of the projected multi-step Bellman equation:
///   A = Psi^T D_mu (I - gamma P)(I - lambda gamma P)^{-1} Psi
///   b = Psi^T D_mu (I - lambda gamma P)^{-1} r
/// v_fixed = Psi theta_star is the unique fixed point of Pi_G T^lambda.
struct ModelFixedPoint {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd theta_star;
  Eigen::VectorXd v_fixed;
};

/// Eligibility trace z_i = sum_{k<=i} (lambda gamma)^{i-k} psi(X_k),
/// maintained by the recursion z <- lambda gamma z + psi.
class TraceState {
 public:
  TraceState(int dim, double lambda, double gamma)
      : z_(Eigen::VectorXd::Zero(dim)), decay_(lambda * gamma) {}

  void step(const Eigen::VectorXd& psi) { z_ = decay_ * z_ + psi; }
  const Eigen::VectorXd& z() const { return z_; }
  void reset() { z_.setZero(); }

 private:
  Eigen::VectorXd z_;
  double decay_;
};

/// Direct solve when the condition estimate stays below 1e12, else the
/// minimum-norm least-squares solution through the pseudo-inverse.
struct ThetaSolve {
  Eigen::VectorXd theta;
  SolveKind solve_kind;
  double condition_estimate;
};
ThetaSolve solve_theta(const Eigen::MatrixXd& a_hat, const Eigen::VectorXd& b_hat);

/// Batch estimator over one trajectory:
///   A = (1/(n-1)) sum_i z_i (phi(X_i) - gamma phi(X_{i+1}))^T
///   b = (1/(n-1)) sum_i z_i r(X_i)
/// Serves both as the ambient-space baseline and, on projected features, as
/// the batch reference for the incremental path.
EstimatorSolution lstd_lambda_batch(const Trajectory& trajectory,
                                    const FeatureMap& features, double gamma,
                                    double lambda);

/// Incremental estimator: projects phi(X_t) on the fly through H, updates the
/// trace, and maintains running means of the update terms, one transition at
/// a time. Equals the batch form on Psi = Phi H^T up to round-off.
EstimatorSolution lstd_lambda_rp_incremental(const Trajectory& trajectory,
                                             const FeatureMap& features_phi,
                                             const ProjectionMatrix& h,
                                             double gamma, double lambda);

/// Exact fixed point from the model. Throws SingularMatrixError (with the
/// condition estimate) when A is numerically singular.
ModelFixedPoint model_fixed_point(const MarkovRewardProcess& mrp,
                                  const StationaryDistribution& mu,
                                  const FeatureMap& features_psi, double lambda);

/// Value vector of a solution: feature matrix times theta.
Eigen::VectorXd value_of(const EstimatorSolution& solution, const FeatureMap& features);

}  // namespace projlstd
