#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "projlstd/config.hpp"
#include "projlstd/lstd.hpp"

namespace projlstd::bench {

/// Run fn(0..count-1) on `jobs` workers. Work items may not share mutable
/// state; output slots are preallocated by index, so results are identical
/// for every worker count.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

struct EstimateRow {
  std::string estimator;  // lstd_lambda | lstd_rp | lstd_lambda_rp
  std::uint64_t traj_seed = 0;
  std::int64_t n = 0;
  int d = 0;
  double lambda = 0.0;
  double estimation_error = 0.0;
  double approximation_error = 0.0;
  double total_error = 0.0;
  std::string solve_kind;
  double condition_estimate = 0.0;
  std::string status = "ok";
};

/// Shared per-config state: the chain, both feature spaces, the exact value
/// function and the model-based fixed points every cell compares against.
struct EstimateContext {
  MarkovRewardProcess mrp;
  StationaryDistribution mu;
  FeatureMap phi;
  Eigen::VectorXd v_exact;
  double nu_f = 0.0;
  double approx_error_f = 0.0;  // ||V - Pi_F V||_mu
  double m_pi_f_v = 0.0;        // m(Pi_F V)
  std::vector<int> ds;          // resolved d grid
  std::map<double, ModelFixedPoint> fixed_f;                 // lambda -> fixed point in F
  std::map<int, ProjectionMatrix> h_by_d;                    // d -> H
  std::map<int, FeatureMap> psi_by_d;                        // d -> Phi H^T
  std::map<std::pair<int, double>, ModelFixedPoint> fixed_g; // (d, lambda) -> fixed point in G
};

EstimateContext make_estimate_context(const ExperimentConfig& config);

std::vector<EstimateRow> run_estimate(const ExperimentConfig& config, int jobs);

struct SweepAggregate {
  std::string estimator;
  std::int64_t n = 0;
  int d = 0;
  double lambda = 0.0;
  int n_seeds = 0;
  double mean_estimation_error = 0.0;
  double mean_approximation_error = 0.0;
  double mean_total_error = 0.0;
  // Bound predictions (LSTD(lambda)-RP rows only; NaN when a hypothesis
  // fails, flagged by hypotheses_ok).
  double bound_estimation = 0.0;
  double bound_approximation = 0.0;
  double bound_total = 0.0;
  double approx_coeff = 0.0;
  bool hypotheses_ok = false;
};

struct SweepSummaryRow {
  std::string kind;  // lambda_argmin | d_argmin
  std::int64_t n = 0;
  int d = 0;          // lambda_argmin rows
  double lambda = 0;  // d_argmin rows
  std::optional<double> lambda_star_measured;
  std::optional<int> d_star_measured;
  std::optional<double> measured_total_at_star;
  std::optional<double> measured_total_at_lambda0;
  std::optional<double> lambda_star_bound;
  std::optional<int> d_star_bound;
};

struct SweepOutput {
  std::vector<EstimateRow> rows;
  std::vector<SweepAggregate> aggregates;
  std::vector<SweepSummaryRow> summary;
};

SweepOutput run_sweep(const ExperimentConfig& config, int jobs);

struct SolveStateRow {
  int d = 0;
  double lambda = 0.0;
  int state = 0;
  double mu = 0.0;
  double v = 0.0;
  double v_fixed = 0.0;
};

struct SolveSummaryRow {
  int d = 0;
  double lambda = 0.0;
  double nu_f = 0.0;
  double nu_g = 0.0;
  double dist_f = 0.0;          // ||V - Pi_F V||_mu
  double dist_g = 0.0;          // ||V - Pi_G V||_mu
  double fixed_residual = 0.0;  // ||V_fixed - Pi_G T^lambda V_fixed||_mu
  double approx_coeff = 0.0;
  double approx_coeff_improved = 0.0;
  double lstd_rp_coeff = 0.0;
  double m_pi_f_v = 0.0;
  double v_max = 0.0;
};

struct SolveBoundsRow {
  std::int64_t n = 0;
  int d = 0;
  double lambda = 0.0;
  double delta = 0.0;
  BoundReport report;
  double upsilon_l7 = 0.0;
};

struct SolveOutput {
  std::vector<SolveStateRow> states;
  std::vector<SolveSummaryRow> summary;
  std::vector<SolveBoundsRow> bounds;
};

SolveOutput run_solve(const ExperimentConfig& config);

struct BenchRow {
  std::string estimator;
  std::int64_t n = 0;
  int d = 0;
  int D = 0;
  double lambda = 0.0;
  int repeats = 0;
  int warmup = 0;
  double median_ms = 0.0;
  double solve_ms = 0.0;
  double accumulate_ms = 0.0;
};

struct BenchOutput {
  std::vector<BenchRow> rows;
  double speedup = 0.0;  // baseline median / projected median
};

BenchOutput run_bench(const ExperimentConfig& config);

struct VerifyCheck {
  std::string fact_id;
  std::string params;
  double empirical = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_pass() const;
};

/// suite: jl | contraction | gram_eig | mixing | bounds_cert | all
VerifyReport run_verify(const ExperimentConfig& config, const std::string& suite, int jobs);

// Command entry points: run, write CSV + sidecar into out_dir, return the
// CLI exit code (0 ok, 2 verification failure).
int cmd_solve(const ExperimentConfig& config, const std::string& out_dir);
int cmd_estimate(const ExperimentConfig& config, const std::string& out_dir, int jobs);
int cmd_sweep(const ExperimentConfig& config, const std::string& out_dir, int jobs);
int cmd_bench(const ExperimentConfig& config, const std::string& out_dir);
int cmd_verify(const ExperimentConfig& config, const std::string& out_dir,
               const std::string& suite, int jobs);

}  // namespace projlstd::bench
