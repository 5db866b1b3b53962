#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "projlstd/features.hpp"

namespace projlstd {

/// d x D random projection with i.i.d. N(0, 1/d) entries. Regenerating with
/// the same (d, D, seed) reproduces H bit-for-bit: entries are filled row by
/// row from the projection sub-stream of the seed.
struct ProjectionMatrix {
  Eigen::MatrixXd h;
  std::uint64_t seed = 0;

  int d() const { return static_cast<int>(h.rows()); }
  int ambient_dim() const { return static_cast<int>(h.cols()); }

  static ProjectionMatrix identity(int dim);
  static ProjectionMatrix from_matrix(Eigen::MatrixXd h);
};

ProjectionMatrix sample_projection(int d, int D, std::uint64_t seed);

/// psi(x) = H phi(x) for every state: output feature matrix is Phi H^T.
/// The projected map's per-coordinate bound is the empirical max |psi_j(x)|.
FeatureMap apply(const ProjectionMatrix& h, const FeatureMap& features);

struct DistortionRate {
  double failure_fraction = 0.0;
  std::int64_t failures = 0;
  std::int64_t tested = 0;
  std::int64_t skipped = 0;  // zero vectors in the input
};

/// Fraction of vectors u with | ||Hu||^2 - ||u||^2 | >= eps ||u||^2.
DistortionRate jl_distortion_rate(const ProjectionMatrix& h,
                                  const std::vector<Eigen::VectorXd>& vectors,
                                  double eps);

/// max_k |Hu_k . Hw - u_k . w| / (||u_k|| ||w||), zero u_k skipped.
double inner_product_distortion(const ProjectionMatrix& h,
                                const std::vector<Eigen::VectorXd>& us,
                                const Eigen::VectorXd& w);

/// Single-vector norm-distortion tail bound 2 exp(-d (eps^2/4 - eps^3/6)).
double fact1_bound(int d, double eps);

/// High-probability floor for the projected Gram's smallest eigenvalue:
/// (D/d) nu_F (1 - sqrt(d/D) - sqrt(2 log(2/delta)/D))^2.
double fact3_eigen_floor(int d, int D, double delta, double nu_f);

}  // namespace projlstd
