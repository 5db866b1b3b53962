#include "projlstd/features.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <sstream>

#include "projlstd/rng.hpp"

namespace projlstd {

namespace {

constexpr double kRankTol = 1e-10;           // relative to the largest singular value
constexpr double kGramConditionCap = 1e14;   // refuse projections past this
constexpr int kGeneratorRetries = 16;

}  // namespace

FeatureMap::FeatureMap(Eigen::MatrixXd phi, double bound)
    : phi_(std::move(phi)), bound_(bound) {
  if (phi_.rows() < 1 || phi_.cols() < 1) {
    throw DimensionError("feature matrix must be nonempty");
  }
  if (!(bound_ > 0.0)) {
    throw Error("feature bound L must be positive");
  }
  if (!phi_.allFinite()) {
    throw Error("feature entries must be finite");
  }
  const double max_abs = phi_.cwiseAbs().maxCoeff();
  if (max_abs > bound_ * (1.0 + 1e-12) + 1e-15) {
    std::ostringstream msg;
    msg << "feature entry magnitude " << max_abs << " exceeds declared bound " << bound_;
    throw Error(msg.str());
  }
  if (phi_.cols() > phi_.rows()) {
    throw Error("feature matrix has more columns than states: cannot have full column rank");
  }
  // Rank-revealing QR as the construction-time full-rank certificate; the
  // check_full_rank operation reports SVD diagnostics at the same tolerance.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi_);
  qr.setThreshold(kRankTol);
  if (qr.rank() != phi_.cols()) {
    std::ostringstream msg;
    msg << "feature matrix is rank deficient: rank " << qr.rank() << " < " << phi_.cols();
    throw Error(msg.str());
  }
}

double FeatureMap::max_row_norm() const {
  return std::sqrt(phi_.rowwise().squaredNorm().maxCoeff());
}

GramMatrix gram(const FeatureMap& features, const StationaryDistribution& mu) {
  if (mu.mu.size() != features.n_states()) {
    throw DimensionError("gram: mu length must equal the feature row count");
  }
  const Eigen::MatrixXd& phi = features.matrix();
  Eigen::MatrixXd m = phi.transpose() * mu.mu.asDiagonal() * phi;
  m = 0.5 * (m + m.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  GramMatrix out;
  out.m = std::move(m);
  out.nu_min = eig.eigenvalues().minCoeff();
  out.nu_max = eig.eigenvalues().maxCoeff();
  return out;
}

RankDiagnostics check_full_rank_diag(const Eigen::MatrixXd& matrix) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix);
  const Eigen::VectorXd& sv = svd.singularValues();
  RankDiagnostics diag;
  diag.sigma_max = sv.size() > 0 ? sv[0] : 0.0;
  diag.sigma_min = sv.size() > 0 ? sv[sv.size() - 1] : 0.0;
  diag.threshold = kRankTol * diag.sigma_max;
  diag.rank = static_cast<int>((sv.array() > diag.threshold).count());
  diag.full_rank = diag.rank == matrix.cols();
  return diag;
}

RankDiagnostics check_full_rank_diag(const FeatureMap& features) {
  return check_full_rank_diag(features.matrix());
}

bool check_full_rank(const Eigen::MatrixXd& matrix) {
  return check_full_rank_diag(matrix).full_rank;
}

bool check_full_rank(const FeatureMap& features) {
  return check_full_rank_diag(features).full_rank;
}

double m_functional(const Eigen::VectorXd& alpha, const FeatureMap& features) {
  if (alpha.size() != features.dim()) {
    throw DimensionError("m_functional: alpha length must equal the feature dimension");
  }
  return alpha.norm() * features.max_row_norm();
}

ProjectionOperator::ProjectionOperator(FeatureMap basis, StationaryDistribution mu)
    : basis_(std::move(basis)), mu_(std::move(mu)) {
  if (mu_.mu.size() != basis_.n_states()) {
    throw DimensionError("projection: mu length must equal the feature row count");
  }
  gram_ = gram(basis_, mu_);
  const double cond = gram_.nu_min > 0.0
                          ? gram_.nu_max / gram_.nu_min
                          : std::numeric_limits<double>::infinity();
  if (!(gram_.nu_min > 0.0) || cond > kGramConditionCap) {
    std::ostringstream msg;
    msg << "Gram matrix numerically singular (condition estimate " << cond << ")";
    throw SingularMatrixError(msg.str(), cond);
  }
  llt_.compute(gram_.m);
  if (llt_.info() != Eigen::Success) {
    throw SingularMatrixError("Gram matrix Cholesky factorization failed", cond);
  }
}

ProjectionOperator::Result ProjectionOperator::project(const Eigen::VectorXd& f) const {
  if (f.size() != basis_.n_states()) {
    throw DimensionError("project: f length must equal the state count");
  }
  const Eigen::MatrixXd& phi = basis_.matrix();
  const Eigen::VectorXd rhs = phi.transpose() * (mu_.mu.asDiagonal() * f);
  Result res;
  res.coefficients = llt_.solve(rhs);
  res.projected = phi * res.coefficients;
  return res;
}

FeatureMap make_features(FeatureKind kind, int n_states, int D, double L,
                         std::uint64_t seed) {
  if (n_states < 1 || D < 1) {
    throw ConfigError("n_states and D must be positive");
  }
  if (!(L > 0.0)) {
    throw ConfigError("feature bound L must be positive");
  }

  auto build = [&](int attempt) -> Eigen::MatrixXd {
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n_states, D);
    switch (kind) {
      case FeatureKind::kOneHot:
        if (D > n_states) {
          throw ConfigError("one_hot features require D <= n_states");
        }
        for (int x = 0; x < n_states; ++x) phi(x, x % D) = 1.0;
        break;
      case FeatureKind::kRandomBounded: {
        Rng rng(derive_seed(seed, Stream::kFeatures, static_cast<std::uint64_t>(attempt)));
        for (int x = 0; x < n_states; ++x) {
          for (int j = 0; j < D; ++j) {
            phi(x, j) = L * (2.0 * rng.next_double() - 1.0);
          }
        }
        break;
      }
      case FeatureKind::kFourierOnIndex: {
        constexpr double kPi = 3.14159265358979323846;
        for (int x = 0; x < n_states; ++x) {
          for (int j = 0; j < D; ++j) {
            phi(x, j) = L * std::cos(kPi * j * (x + 0.5) / n_states);
          }
        }
        break;
      }
    }
    return phi;
  };

  const double bound = (kind == FeatureKind::kOneHot) ? std::max(L, 1.0) : L;
  for (int attempt = 0; attempt < kGeneratorRetries; ++attempt) {
    try {
      return FeatureMap(build(attempt), bound);
    } catch (const Error&) {
      if (kind != FeatureKind::kRandomBounded || attempt + 1 == kGeneratorRetries) {
        throw;
      }
    }
  }
  throw Error("feature generator retry budget exhausted");
}

}  // namespace projlstd
