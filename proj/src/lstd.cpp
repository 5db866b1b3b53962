#include "projlstd/lstd.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <sstream>

namespace projlstd {

namespace {

constexpr double kDirectSolveConditionCap = 1e12;
constexpr int kAccumulateBlock = 64;  // rank-1 sums grouped into GEMM blocks

void check_estimator_inputs(const Trajectory& trajectory, int n_states,
                            double gamma, double lambda) {
  if (trajectory.length() < 2) {
    throw Error("estimator requires a trajectory of length >= 2");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw Error("gamma must lie in [0, 1)");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error("lambda must lie in [0, 1]");
  }
  for (int x : trajectory.states) {
    if (x < 0 || x >= n_states) {
      throw DimensionError("trajectory state index out of range for the feature map");
    }
  }
}

}  // namespace

const char* to_string(SolveKind kind) {
  return kind == SolveKind::kDirect ? "direct" : "pseudo_inverse";
}

ThetaSolve solve_theta(const Eigen::MatrixXd& a_hat, const Eigen::VectorXd& b_hat) {
  if (a_hat.rows() != a_hat.cols()) {
    throw DimensionError("solve_theta: A must be square");
  }
  if (b_hat.size() != a_hat.rows()) {
    throw DimensionError("solve_theta: b length must match A");
  }
  if (!a_hat.allFinite() || !b_hat.allFinite()) {
    throw Error("solve_theta: non-finite entries");
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a_hat);
  const double rcond = lu.rcond();
  const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (cond <= kDirectSolveConditionCap) {
    return {lu.solve(b_hat), SolveKind::kDirect, cond};
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a_hat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.solve(b_hat), SolveKind::kPseudoInverse, cond};
}

EstimatorSolution lstd_lambda_batch(const Trajectory& trajectory,
                                    const FeatureMap& features, double gamma,
                                    double lambda) {
  check_estimator_inputs(trajectory, features.n_states(), gamma, lambda);
  const std::int64_t n = trajectory.length();
  const int k = features.dim();
  const Eigen::MatrixXd& phi = features.matrix();

  Eigen::MatrixXd a_sum = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd b_sum = Eigen::VectorXd::Zero(k);
  TraceState trace(k, lambda, gamma);

  Eigen::MatrixXd z_block(k, kAccumulateBlock);
  Eigen::MatrixXd diff_block(kAccumulateBlock, k);
  int filled = 0;
  for (std::int64_t i = 0; i + 1 < n; ++i) {
    const int x = trajectory.states[static_cast<std::size_t>(i)];
    const int x_next = trajectory.states[static_cast<std::size_t>(i + 1)];
    trace.step(phi.row(x).transpose());
    z_block.col(filled) = trace.z();
    diff_block.row(filled) = phi.row(x) - gamma * phi.row(x_next);
    b_sum.noalias() += trace.z() * trajectory.rewards[i];
    if (++filled == kAccumulateBlock) {
      a_sum.noalias() += z_block * diff_block;
      filled = 0;
    }
  }
  if (filled > 0) {
    a_sum.noalias() += z_block.leftCols(filled) * diff_block.topRows(filled);
  }

  EstimatorSolution sol;
  sol.n_transitions = n - 1;
  sol.a_hat = a_sum / static_cast<double>(n - 1);
  sol.b_hat = b_sum / static_cast<double>(n - 1);
  ThetaSolve ts = solve_theta(sol.a_hat, sol.b_hat);
  sol.theta = std::move(ts.theta);
  sol.solve_kind = ts.solve_kind;
  sol.condition_estimate = ts.condition_estimate;
  return sol;
}

EstimatorSolution lstd_lambda_rp_incremental(const Trajectory& trajectory,
                                             const FeatureMap& features_phi,
                                             const ProjectionMatrix& h,
                                             double gamma, double lambda) {
  check_estimator_inputs(trajectory, features_phi.n_states(), gamma, lambda);
  if (h.ambient_dim() != features_phi.dim()) {
    throw DimensionError("projection columns must match the feature dimension");
  }
  const std::int64_t n = trajectory.length();
  const int d = h.d();
  const Eigen::MatrixXd& phi = features_phi.matrix();

  EstimatorSolution sol;
  sol.a_hat = Eigen::MatrixXd::Zero(d, d);
  sol.b_hat = Eigen::VectorXd::Zero(d);
  TraceState trace(d, lambda, gamma);
  Eigen::MatrixXd delta_a(d, d);

  // psi(X_t) = H phi(X_t) computed per step; the next state's projection is
  // reused as the current one on the following transition.
  Eigen::VectorXd psi_t =
      h.h * phi.row(trajectory.states[0]).transpose();
  Eigen::VectorXd psi_next(d);
  for (std::int64_t i = 0; i + 1 < n; ++i) {
    psi_next.noalias() = h.h * phi.row(trajectory.states[static_cast<std::size_t>(i + 1)]).transpose();
    trace.step(psi_t);
    delta_a.noalias() = trace.z() * (psi_t - gamma * psi_next).transpose();
    const double t = static_cast<double>(i + 1);  // transitions processed
    sol.a_hat += (delta_a - sol.a_hat) / t;
    sol.b_hat += (trace.z() * trajectory.rewards[i] - sol.b_hat) / t;
    psi_t.swap(psi_next);
  }

  sol.n_transitions = n - 1;
  ThetaSolve ts = solve_theta(sol.a_hat, sol.b_hat);
  sol.theta = std::move(ts.theta);
  sol.solve_kind = ts.solve_kind;
  sol.condition_estimate = ts.condition_estimate;
  return sol;
}

ModelFixedPoint model_fixed_point(const MarkovRewardProcess& mrp,
                                  const StationaryDistribution& mu,
                                  const FeatureMap& features_psi, double lambda) {
  if (features_psi.n_states() != mrp.n_states() || mu.mu.size() != mrp.n_states()) {
    throw DimensionError("model_fixed_point: state counts disagree");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error("lambda must lie in [0, 1]");
  }
  const int n = mrp.n_states();
  const double gamma = mrp.gamma();
  const Eigen::MatrixXd& p = mrp.transition();
  const Eigen::MatrixXd& psi = features_psi.matrix();

  const Eigen::MatrixXd resolvent = Eigen::MatrixXd::Identity(n, n) - lambda * gamma * p;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(resolvent);

  const Eigen::MatrixXd c = lu.solve(psi);           // (I - lambda gamma P)^{-1} Psi
  const Eigen::MatrixXd m = c - gamma * (p * c);     // (I - gamma P) applied
  ModelFixedPoint fp;
  fp.a = psi.transpose() * (mu.mu.asDiagonal() * m);
  fp.b = psi.transpose() * (mu.mu.asDiagonal() * lu.solve(mrp.rewards()));

  Eigen::PartialPivLU<Eigen::MatrixXd> a_lu(fp.a);
  const double rcond = a_lu.rcond();
  const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (cond > kDirectSolveConditionCap) {
    std::ostringstream msg;
    msg << "model fixed-point matrix A is numerically singular (condition estimate "
        << cond << "); check feature rank and the stationary weighting";
    throw SingularMatrixError(msg.str(), cond);
  }
  fp.theta_star = a_lu.solve(fp.b);
  fp.v_fixed = psi * fp.theta_star;
  return fp;
}

Eigen::VectorXd value_of(const EstimatorSolution& solution, const FeatureMap& features) {
  if (solution.theta.size() != features.dim()) {
    throw DimensionError("value_of: theta length must equal the feature dimension");
  }
  return features.matrix() * solution.theta;
}

}  // namespace projlstd
