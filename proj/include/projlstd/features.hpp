#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>

#include "projlstd/chain.hpp"
#include "projlstd/errors.hpp"

namespace projlstd {

struct RankDiagnostics {
  bool full_rank = false;
  int rank = 0;
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  double threshold = 0.0;  // sigma cut-off actually applied
};

/// |X| x D feature matrix, row x = phi(x)^T, entries bounded by `bound`.
/// Full column rank (relative tolerance 1e-10) is verified at construction;
/// a rank-deficient matrix is an input error, not something to repair.
class FeatureMap {
 public:
  FeatureMap(Eigen::MatrixXd phi, double bound);

  const Eigen::MatrixXd& matrix() const { return phi_; }
  int dim() const { return static_cast<int>(phi_.cols()); }
  int n_states() const { return static_cast<int>(phi_.rows()); }
  double bound() const { return bound_; }

  Eigen::VectorXd row(int x) const { return phi_.row(x).transpose(); }

  /// max_x ||phi(x)||_2
  double max_row_norm() const;

 private:
  Eigen::MatrixXd phi_;
  double bound_;
};

struct GramMatrix {
  Eigen::MatrixXd m;   // Phi^T D_mu Phi, symmetrized
  double nu_min = 0.0; // smallest eigenvalue
  double nu_max = 0.0;
};

/// Gram matrix under the mu weighting: sum_x mu(x) phi(x) phi(x)^T.
GramMatrix gram(const FeatureMap& features, const StationaryDistribution& mu);

/// SVD rank report with the 1e-10 relative singular-value tolerance. The
/// raw-matrix overload exists because FeatureMap construction already
/// enforces the invariant; candidate matrices are checked before wrapping.
RankDiagnostics check_full_rank_diag(const Eigen::MatrixXd& matrix);
RankDiagnostics check_full_rank_diag(const FeatureMap& features);
bool check_full_rank(const Eigen::MatrixXd& matrix);
bool check_full_rank(const FeatureMap& features);

/// m(f_alpha) = ||alpha||_2 * sup_x ||phi(x)||_2.
double m_functional(const Eigen::VectorXd& alpha, const FeatureMap& features);

/// mu-weighted orthogonal projection onto span of the basis columns.
/// The Gram factorization is done once at construction; a numerically
/// singular Gram matrix is refused with its condition estimate.
class ProjectionOperator {
 public:
  ProjectionOperator(FeatureMap basis, StationaryDistribution mu);

  struct Result {
    Eigen::VectorXd projected;     // Pi f
    Eigen::VectorXd coefficients;  // basis coefficients of Pi f
  };
  Result project(const Eigen::VectorXd& f) const;

  const FeatureMap& basis() const { return basis_; }
  const StationaryDistribution& weighting() const { return mu_; }
  const GramMatrix& gram_matrix() const { return gram_; }

 private:
  FeatureMap basis_;
  StationaryDistribution mu_;
  GramMatrix gram_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

enum class FeatureKind { kOneHot, kRandomBounded, kFourierOnIndex };

/// Test-bed feature generators. All outputs satisfy the entry bound and the
/// full-rank invariant; random generators resample a bounded number of times
/// on rank failure.
///  one_hot:          phi_j(x) = 1 if x mod D == j (identity when D == |X|)
///  random_bounded:   i.i.d. uniform entries in [-L, L]
///  fourier_on_index: phi_j(x) = L cos(pi j (x + 1/2) / |X|)
FeatureMap make_features(FeatureKind kind, int n_states, int D, double L,
                         std::uint64_t seed);

}  // namespace projlstd
