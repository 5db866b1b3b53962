#include "projlstd/rp.hpp"

#include <cmath>

#include "projlstd/bounds.hpp"
#include "projlstd/rng.hpp"

namespace projlstd {

ProjectionMatrix ProjectionMatrix::identity(int dim) {
  return {Eigen::MatrixXd::Identity(dim, dim), 0};
}

ProjectionMatrix ProjectionMatrix::from_matrix(Eigen::MatrixXd h) {
  return {std::move(h), 0};
}

ProjectionMatrix sample_projection(int d, int D, std::uint64_t seed) {
  if (d < 1 || D < 1) {
    throw Error("projection dimensions must be positive");
  }
  Rng rng(derive_seed(seed, Stream::kProjection));
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Eigen::MatrixXd h(d, D);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < D; ++j) {
      h(i, j) = scale * rng.next_gaussian();
    }
  }
  return {std::move(h), seed};
}

FeatureMap apply(const ProjectionMatrix& h, const FeatureMap& features) {
  if (h.ambient_dim() != features.dim()) {
    throw DimensionError("apply: projection columns must match the feature dimension");
  }
  Eigen::MatrixXd psi = features.matrix() * h.h.transpose();
  double bound = psi.cwiseAbs().maxCoeff();
  if (!(bound > 0.0)) bound = 1.0;  // all-zero projection of a zero map
  return FeatureMap(std::move(psi), bound);
}

DistortionRate jl_distortion_rate(const ProjectionMatrix& h,
                                  const std::vector<Eigen::VectorXd>& vectors,
                                  double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw DomainError("jl_distortion_rate: eps must lie in (0, 1)");
  }
  DistortionRate out;
  if (vectors.empty()) return out;

  // Pack into a matrix so the products run as one GEMM.
  const int D = h.ambient_dim();
  Eigen::MatrixXd u(D, static_cast<int>(vectors.size()));
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    if (vectors[k].size() != D) {
      throw DimensionError("jl_distortion_rate: vector length must equal D");
    }
    u.col(static_cast<int>(k)) = vectors[k];
  }
  const Eigen::MatrixXd hu = h.h * u;
  for (int k = 0; k < u.cols(); ++k) {
    const double norm2 = u.col(k).squaredNorm();
    if (norm2 == 0.0) {
      ++out.skipped;
      continue;
    }
    ++out.tested;
    if (std::abs(hu.col(k).squaredNorm() - norm2) >= eps * norm2) ++out.failures;
  }
  out.failure_fraction =
      out.tested > 0 ? static_cast<double>(out.failures) / out.tested : 0.0;
  return out;
}

double inner_product_distortion(const ProjectionMatrix& h,
                                const std::vector<Eigen::VectorXd>& us,
                                const Eigen::VectorXd& w) {
  if (w.size() != h.ambient_dim()) {
    throw DimensionError("inner_product_distortion: w length must equal D");
  }
  const double w_norm = w.norm();
  if (w_norm == 0.0) {
    throw Error("inner_product_distortion: w must be nonzero");
  }
  const Eigen::VectorXd hw = h.h * w;
  double worst = 0.0;
  for (const auto& u : us) {
    if (u.size() != w.size()) {
      throw DimensionError("inner_product_distortion: u length must equal D");
    }
    const double u_norm = u.norm();
    if (u_norm == 0.0) continue;
    const double distortion = std::abs((h.h * u).dot(hw) - u.dot(w)) / (u_norm * w_norm);
    worst = std::max(worst, distortion);
  }
  return worst;
}

double fact1_bound(int d, double eps) {
  return 2.0 * std::exp(-d * (eps * eps / 4.0 - eps * eps * eps / 6.0));
}

double fact3_eigen_floor(int d, int D, double delta, double nu_f) {
  return (static_cast<double>(D) / d) * nu_f * eta(d, D, delta);
}

}  // namespace projlstd
