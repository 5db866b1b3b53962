#pragma once

#include <cstdint>
#include <optional>

#include "projlstd/errors.hpp"

namespace projlstd {

/// Exponential beta-mixing parameters: beta(m) <= beta0 exp(-beta1 m^kappa).
/// These are declared inputs (default 1,1,1); the toolkit never estimates them.
struct MixingParams {
  double beta0 = 1.0;
  double beta1 = 1.0;
  double kappa = 1.0;
};

struct BoundInputs {
  std::int64_t n = 2;  // trajectory length
  int d = 1;           // projected dimension
  int D = 2;           // ambient dimension
  double delta = 0.1;
  double gamma = 0.9;
  double lambda = 0.0;
  double L = 1.0;       // feature coordinate bound
  double nu_f = 1.0;    // smallest eigenvalue of the ambient Gram matrix
  double v_max = 1.0;   // R_max / (1 - gamma)
  MixingParams mixing;
  double m_pi_f_v = 0.0;  // m(Pi_F V)
};

/// Trace-length staircase: ceil(log(n-1)/log(1/(lambda gamma))), 0 at lambda=0.
std::int64_t m_n_lambda(std::int64_t n, double lambda, double gamma);

/// xi(n, d, delta) = 1 + sqrt((8/d) log(n/delta)).
double xi(std::int64_t n, int d, double delta);

/// eta(d, D, delta) = (1 - sqrt(d/D) - sqrt(2 log(2/delta)/D))^2.
/// Throws DomainError when the inner expression is nonpositive (D too small).
double eta(int d, int D, double delta);

/// Lambda(n, delta) = log(8 n^2 / delta) + log(max{4 e^2, n beta0}).
double lambda_fn(std::int64_t n, double delta, const MixingParams& mixing);

/// I(n, delta) = 32 Lambda max{Lambda/beta1, 1}^{1/kappa}.
double i_fn(std::int64_t n, double delta, const MixingParams& mixing);

/// Two displayed groupings of the same quantity; their ratio is checked to
/// be 1 by the test suite, and both are exposed as written.
///   theorem-5 form:  (log((4 + n beta0)/delta))^{1 + 1/kappa} beta1^{-1/kappa}
///   lemma-7 form:    X (X / beta1)^{1/kappa},  X = log(1/delta) + log(4 + n beta0)
double upsilon_theorem5(std::int64_t n, double delta, const MixingParams& mixing);
double upsilon_lemma7(std::int64_t n, double delta, const MixingParams& mixing);

/// Left-hand side of the sample-size inequality solved by n0():
///   (2 d L^2 / ((1-gamma) nu_F eta(d,D,delta/2))) *
///     [ (2 xi(n,d,delta/4)/sqrt(n-1)) sqrt((1+m) I(n-1,delta/2))
///       + (2 xi(n,d,delta/4)/(n-1)) m + 1/((1-lambda gamma)(n-1)) ]
double sample_size_lhs(const BoundInputs& in, std::int64_t n);

struct N0Result {
  bool found = false;
  std::int64_t n0 = 0;       // valid when found
  std::int64_t cap = 0;
  double lhs_at_cap = 0.0;   // diagnostic when not found
};

/// Smallest n <= cap with sample_size_lhs(n) < 1, or an explicit not-found
/// result. Exact: a linear prescan covers small n, and the search honors the
/// upward jumps of the m-staircase before refining within monotone segments.
N0Result n0(const BoundInputs& in, std::int64_t cap = 1'000'000'000);

/// Estimation-error bound
///   4 V_max d L^2 xi(n,d,delta/4) sqrt((m+1) I(n-1,delta/4))
///     / (sqrt(n-1) (1-gamma) nu_F eta(d,D,delta/2)),
/// hypotheses D > d + 2 sqrt(2 d log(4/delta)) + 2 log(4/delta) and
/// d >= 15 log(4n/delta). The unreported lower-order h(n,d,delta) term is
/// omitted, never fabricated. With enforce_hypotheses = false a violated
/// hypothesis yields NaN instead of a DomainError.
double estimation_bound(const BoundInputs& in, bool enforce_hypotheses = true);

/// (1 - lambda gamma)/(1 - gamma), or the improved
/// (1 - lambda gamma)/sqrt((1-gamma)(1+gamma-2 lambda gamma)).
double approx_coefficient(double gamma, double lambda, bool improved = false);

/// The lambda = 0 coefficient of the earlier projection-only analysis,
/// 4 sqrt(2)/sqrt(1-gamma^2), reported for comparison.
double lstd_rp_approx_coefficient(double gamma);

/// Approximation-error bound
///   coeff * [ approx_error_F
///             + sqrt((8/d) log(8n/delta)) (1 + 2 sqrt(Upsilon(n,delta/2))/sqrt(n))
///               m(Pi_F V) ],
/// hypothesis d >= 15 log(8n/delta).
double approximation_bound(const BoundInputs& in, double approx_error_f,
                           bool improved = false, bool enforce_hypotheses = true);

struct BoundReport {
  std::int64_t m_n_lambda = 0;
  double xi = 0.0;           // xi(n, d, delta/8)
  double eta = 0.0;          // eta(d, D, delta/4)
  double lambda_val = 0.0;   // Lambda(n-1, delta/8)
  double i_val = 0.0;        // I(n-1, delta/8)
  double upsilon_val = 0.0;  // Upsilon(n, delta/4)
  std::optional<std::int64_t> n0;  // empty when not found below the cap
  double estimation_bound = 0.0;
  double approximation_bound = 0.0;
  double total_bound = 0.0;
  bool h_term_omitted = true;
  bool hypotheses_ok = true;
};

/// Total-error bound with its own delta splittings (xi at delta/8,
/// I at delta/8, eta at delta/4, Upsilon at delta/4, log(16n/delta)),
/// hypotheses D > d + 2 sqrt(2 d log(8/delta)) + 2 log(8/delta) and
/// d >= 15 log(16n/delta).
BoundReport total_bound(const BoundInputs& in, double approx_error_f,
                        bool enforce_hypotheses = true,
                        std::int64_t n0_cap = 1'000'000'000);

/// Chernoff-Hoeffding radius for stationary beta-mixing averages:
/// (2 M_h / sqrt(n)) sqrt(Upsilon(n, delta)) in the lemma-7 grouping.
double mixing_hoeffding_radius(std::int64_t n, double delta, double m_h,
                               const MixingParams& mixing);

}  // namespace projlstd
