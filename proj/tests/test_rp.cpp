#include "doctest.h"

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "projlstd/bounds.hpp"
#include "projlstd/features.hpp"
#include "projlstd/rng.hpp"
#include "projlstd/rp.hpp"

using namespace projlstd;

namespace {

std::vector<Eigen::VectorXd> gaussian_vectors(int count, int dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(count));
  for (auto& u : out) {
    u.resize(dim);
    for (int j = 0; j < dim; ++j) u[j] = rng.next_gaussian();
  }
  return out;
}

}  // namespace

TEST_CASE("sample_projection is deterministic in (d, D, seed)") {
  const ProjectionMatrix a = sample_projection(4, 16, 123);
  const ProjectionMatrix b = sample_projection(4, 16, 123);
  CHECK(a.h == b.h);
  const ProjectionMatrix c = sample_projection(4, 16, 124);
  CHECK(a.h != c.h);
}

TEST_CASE("entry statistics match N(0, 1/d)") {
  SUBCASE("variance within 5% at d=64, D=4096") {
    const ProjectionMatrix h = sample_projection(64, 4096, 7);
    const double mean = h.h.mean();
    const double var = (h.h.array() - mean).square().sum() / (h.h.size() - 1);
    CHECK(std::abs(mean) < 0.001);
    CHECK(std::abs(var - 1.0 / 64.0) < 0.05 / 64.0);
  }
  SUBCASE("a 1x1 projection is a unit-variance draw") {
    double sum = 0.0, sum2 = 0.0;
    const int trials = 20000;
    for (int s = 0; s < trials; ++s) {
      const double x = sample_projection(1, 1, static_cast<std::uint64_t>(s)).h(0, 0);
      sum += x;
      sum2 += x * x;
    }
    CHECK(std::abs(sum / trials) < 0.02);
    CHECK(std::abs(sum2 / trials - 1.0) < 0.05);
  }
}

TEST_CASE("apply: identity, single row, and the naive oracle") {
  const FeatureMap phi = make_features(FeatureKind::kRandomBounded, 6, 4, 1.0, 5);
  SUBCASE("identity projection returns the input") {
    const FeatureMap psi = apply(ProjectionMatrix::identity(4), phi);
    CHECK((psi.matrix() - phi.matrix()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("single nonzero row gives scalar inner products") {
    Eigen::MatrixXd row = Eigen::MatrixXd::Zero(1, 4);
    row << 0.5, -1.0, 2.0, 0.25;
    const FeatureMap psi = apply(ProjectionMatrix::from_matrix(row), phi);
    for (int x = 0; x < 6; ++x) {
      CHECK(psi.matrix()(x, 0) ==
            doctest::Approx(row.row(0).dot(phi.matrix().row(x))).epsilon(1e-14));
    }
  }
  SUBCASE("matches a row-by-row matrix-vector oracle") {
    const ProjectionMatrix h = sample_projection(3, 4, 99);
    const FeatureMap psi = apply(h, phi);
    for (int x = 0; x < 6; ++x) {
      for (int i = 0; i < 3; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 4; ++j) acc += h.h(i, j) * phi.matrix()(x, j);
        REQUIRE(std::abs(psi.matrix()(x, i) - acc) < 1e-12);
      }
    }
    CHECK(psi.bound() == psi.matrix().cwiseAbs().maxCoeff());
  }
  SUBCASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(apply(sample_projection(2, 5, 0), phi), DimensionError);
  }
}

TEST_CASE("jl_distortion_rate basics") {
  const ProjectionMatrix h = sample_projection(256, 32, 11);
  auto vectors = gaussian_vectors(1000, 32, 21);
  SUBCASE("large d and eps near 1 produce no failures") {
    const DistortionRate rate = jl_distortion_rate(h, vectors, 0.999);
    CHECK(rate.failure_fraction == 0.0);
    CHECK(rate.tested == 1000);
  }
  SUBCASE("zero vectors are skipped with a count") {
    vectors[3].setZero();
    vectors[17].setZero();
    const DistortionRate rate = jl_distortion_rate(h, vectors, 0.5);
    CHECK(rate.skipped == 2);
    CHECK(rate.tested == 998);
  }
  SUBCASE("eps outside (0,1) is rejected") {
    CHECK_THROWS_AS(jl_distortion_rate(h, vectors, 0.0), DomainError);
    CHECK_THROWS_AS(jl_distortion_rate(h, vectors, 1.0), DomainError);
  }
}

TEST_CASE("norm-distortion failure rate stays under the analytic tail bound") {
  const int d = 128;
  const double eps = 0.5;
  const int draws = 10;
  const int n_vec = 2000;
  const auto vectors = gaussian_vectors(n_vec, 64, 3);
  std::int64_t failures = 0, tested = 0;
  for (int i = 0; i < draws; ++i) {
    const ProjectionMatrix h = sample_projection(d, 64, 1000 + static_cast<std::uint64_t>(i));
    const DistortionRate rate = jl_distortion_rate(h, vectors, eps);
    failures += rate.failures;
    tested += rate.tested;
  }
  const double empirical = static_cast<double>(failures) / static_cast<double>(tested);
  const double bound = fact1_bound(d, eps);
  const double slack = 3.0 * std::sqrt(bound * (1.0 - bound) / static_cast<double>(tested));
  CHECK(empirical <= bound + slack);
}

TEST_CASE("expectation of ||Hu||^2 converges to ||u||^2") {
  const int d = 32, D = 64;
  Eigen::VectorXd u(D);
  Rng rng(5);
  for (int j = 0; j < D; ++j) u[j] = rng.next_gaussian();
  u.normalize();
  double acc = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const ProjectionMatrix h = sample_projection(d, D, 50000 + static_cast<std::uint64_t>(i));
    acc += (h.h * u).squaredNorm();
  }
  CHECK(std::abs(acc / draws - 1.0) <= 0.02);
}

TEST_CASE("inner_product_distortion") {
  const FeatureMap phi = make_features(FeatureKind::kRandomBounded, 6, 8, 1.0, 2);
  auto us = gaussian_vectors(20, 8, 31);
  Eigen::VectorXd w(8);
  Rng rng(41);
  for (int j = 0; j < 8; ++j) w[j] = rng.next_gaussian();

  SUBCASE("identity projection has zero distortion") {
    CHECK(inner_product_distortion(ProjectionMatrix::identity(8), us, w) < 1e-14);
  }
  SUBCASE("u = w reduces to the relative norm distortion") {
    const ProjectionMatrix h = sample_projection(4, 8, 77);
    const double got = inner_product_distortion(h, {w}, w);
    const double expected =
        std::abs((h.h * w).squaredNorm() - w.squaredNorm()) / w.squaredNorm();
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("zero w is rejected, zero u skipped") {
    CHECK_THROWS_AS(inner_product_distortion(sample_projection(4, 8, 1), us,
                                             Eigen::VectorXd::Zero(8)),
                    Error);
    auto with_zero = us;
    with_zero[0].setZero();
    CHECK_NOTHROW(inner_product_distortion(sample_projection(4, 8, 1), with_zero, w));
  }
}

TEST_CASE("inner-product preservation holds at the prescribed dimension") {
  // d >= log(4n/delta) / (eps^2/4 - eps^3/6) guarantees all n products are
  // preserved with probability 1 - delta; certified over 50 draws here.
  const int n_vec = 50;
  const double eps = 0.5, delta = 0.05;
  const int d =
      static_cast<int>(std::ceil(std::log(4.0 * n_vec / delta) / (eps * eps / 4 - eps * eps * eps / 6)));
  const auto us = gaussian_vectors(n_vec, 64, 8);
  Eigen::VectorXd w(64);
  Rng rng(9);
  for (int j = 0; j < 64; ++j) w[j] = rng.next_gaussian();

  const int draws = 50;
  int ok = 0;
  for (int i = 0; i < draws; ++i) {
    const ProjectionMatrix h = sample_projection(d, 64, 7000 + static_cast<std::uint64_t>(i));
    if (inner_product_distortion(h, us, w) <= eps) ++ok;
  }
  const double floor = (1.0 - delta) - 3.0 * std::sqrt(delta * (1.0 - delta) / draws);
  CHECK(static_cast<double>(ok) / draws >= floor);
}

TEST_CASE("rank is preserved across projection draws") {
  const FeatureMap phi = make_features(FeatureKind::kRandomBounded, 10, 7, 1.0, 6);
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const FeatureMap psi = apply(sample_projection(3, 7, seed), phi);
    REQUIRE(check_full_rank(psi));
  }
}

TEST_CASE("projected gram eigenvalue floor holds with the stated probability") {
  // Same structure as the acceptance criterion, at reduced scale.
  const int D = 256, d = 8;
  const double delta = 0.1;
  Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(D, D);
  const FeatureMap phi(std::move(identity), 1.0);
  StationaryDistribution mu{Eigen::VectorXd::Constant(D, 1.0 / D)};
  const double floor = fact3_eigen_floor(d, D, delta, 1.0 / D);

  const int draws = 300;
  int ok = 0;
  for (int i = 0; i < draws; ++i) {
    const FeatureMap psi =
        apply(sample_projection(d, D, 90000 + static_cast<std::uint64_t>(i)), phi);
    if (gram(psi, mu).nu_min >= floor) ++ok;
  }
  const double required = (1.0 - delta) - 3.0 * std::sqrt(delta * (1.0 - delta) / draws);
  CHECK(static_cast<double>(ok) / draws >= required);
}
