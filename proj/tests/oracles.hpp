// Test-only oracles, deliberately independent of the library's solve paths:
// naive Gaussian elimination, direct triple-product Gram sums, truncated
// operator series and an O(n^2) eligibility-trace expansion.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "projlstd/chain.hpp"
#include "projlstd/features.hpp"

namespace oracles {

// Gaussian elimination with partial pivoting.
inline Eigen::VectorXd gauss_solve(Eigen::MatrixXd a, Eigen::VectorXd b) {
  const int n = static_cast<int>(a.rows());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    }
    if (a(pivot, col) == 0.0) throw std::runtime_error("gauss_solve: singular");
    a.row(col).swap(a.row(pivot));
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < n; ++r) {
      const double factor = a(r, col) / a(col, col);
      a.row(r) -= factor * a.row(col);
      b[r] -= factor * b[col];
    }
  }
  Eigen::VectorXd x(n);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int c = r + 1; c < n; ++c) acc -= a(r, c) * x[c];
    x[r] = acc / a(r, r);
  }
  return x;
}

// Direct elementwise sum_x mu(x) phi(x) phi(x)^T.
inline Eigen::MatrixXd naive_gram(const Eigen::MatrixXd& phi, const Eigen::VectorXd& mu) {
  const int d = static_cast<int>(phi.cols());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (int x = 0; x < phi.rows(); ++x) {
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        m(i, j) += mu[x] * phi(x, i) * phi(x, j);
      }
    }
  }
  return m;
}

// (1 - lambda) sum_{i=0}^K lambda^i T^{i+1} f, evaluated term by term.
inline Eigen::VectorXd truncated_multistep(const projlstd::MarkovRewardProcess& mrp,
                                           double lambda, const Eigen::VectorXd& f, int K) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mrp.n_states());
  Eigen::VectorXd iterate = f;
  double weight = 1.0 - lambda;
  for (int i = 0; i <= K; ++i) {
    iterate = mrp.rewards() + mrp.gamma() * (mrp.transition() * iterate);  // T^{i+1} f
    out += weight * iterate;
    weight *= lambda;
  }
  return out;
}

// Eq.-(8)-style batch sums with traces recomputed from scratch per step.
struct NaiveBatch {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};
inline NaiveBatch naive_lstd_batch(const std::vector<int>& states,
                                   const Eigen::VectorXd& rewards,
                                   const Eigen::MatrixXd& psi_rows,  // state x -> psi(x)^T
                                   double gamma, double lambda) {
  const int k = static_cast<int>(psi_rows.cols());
  const int n = static_cast<int>(states.size());
  NaiveBatch out{Eigen::MatrixXd::Zero(k, k), Eigen::VectorXd::Zero(k)};
  for (int i = 0; i + 1 < n; ++i) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(k);
    for (int j = 0; j <= i; ++j) {
      z += std::pow(lambda * gamma, i - j) * psi_rows.row(states[j]).transpose();
    }
    const Eigen::VectorXd diff =
        psi_rows.row(states[i]).transpose() - gamma * psi_rows.row(states[i + 1]).transpose();
    out.a += z * diff.transpose();
    out.b += z * rewards[i];
  }
  out.a /= n - 1;
  out.b /= n - 1;
  return out;
}

inline double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(1e-300, b.norm());
  return (a - b).norm() / scale;
}

}  // namespace oracles
