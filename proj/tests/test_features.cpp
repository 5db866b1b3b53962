#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "projlstd/chain.hpp"
#include "projlstd/features.hpp"
#include "projlstd/rng.hpp"
#include "projlstd/rp.hpp"

using namespace projlstd;

namespace {

MarkovRewardProcess five_ring() {
  ChainParams params;
  params.stay = 0.1;
  params.gamma = 0.9;
  return make_chain(ChainKind::kRing, 5, params, 3);
}

FeatureMap random_features(int n_states, int D, std::uint64_t seed, double L = 1.0) {
  return make_features(FeatureKind::kRandomBounded, n_states, D, L, seed);
}

Eigen::VectorXd random_vector(Rng& rng, int n, double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * (2.0 * rng.next_double() - 1.0);
  return v;
}

}  // namespace

TEST_CASE("feature map construction enforces the entry bound and full rank") {
  Eigen::MatrixXd ok(3, 2);
  ok << 1, 0, 0, 1, 0.5, 0.5;
  CHECK_NOTHROW(FeatureMap(ok, 1.0));
  CHECK_THROWS_AS(FeatureMap(ok, 0.4), Error);  // entries exceed the bound

  Eigen::MatrixXd dup(3, 2);
  dup << 1, 1, 2, 2, 3, 3;  // duplicated column
  CHECK_FALSE(check_full_rank(dup));
  CHECK_THROWS_AS(FeatureMap(dup, 5.0), Error);
}

TEST_CASE("gram: one-hot features under the uniform weighting") {
  const FeatureMap one_hot = make_features(FeatureKind::kOneHot, 5, 5, 1.0, 0);
  CHECK(one_hot.matrix() == Eigen::MatrixXd::Identity(5, 5));
  StationaryDistribution uniform{Eigen::VectorXd::Constant(5, 0.2)};
  const GramMatrix g = gram(one_hot, uniform);
  CHECK((g.m - 0.2 * Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-14);
  CHECK(g.nu_min == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("gram: zero-weight states contribute nothing") {
  Eigen::MatrixXd phi(3, 2);
  phi << 1, 0, 0, 1, 1, 1;
  const FeatureMap features(phi, 1.0);
  StationaryDistribution mu{Eigen::Vector3d(0.0, 0.5, 0.5)};
  Eigen::MatrixXd phi_altered = phi;
  phi_altered.row(0) << -1, 1;  // only the zero-weight row changes
  const GramMatrix a = gram(features, mu);
  const GramMatrix b = gram(FeatureMap(phi_altered, 1.0), mu);
  CHECK((a.m - b.m).norm() < 1e-15);
}

TEST_CASE("gram matches the naive triple-product oracle") {
  const MarkovRewardProcess mrp = five_ring();
  const auto mu = stationary_distribution(mrp);
  const FeatureMap features = random_features(5, 3, 11);
  const GramMatrix g = gram(features, mu);
  const Eigen::MatrixXd expected = oracles::naive_gram(features.matrix(), mu.mu);
  CHECK((g.m - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(g.m.isApprox(g.m.transpose(), 1e-12));
  CHECK(g.nu_min >= -1e-12);
}

TEST_CASE("gram smallest eigenvalue grows when any state gains weight") {
  const FeatureMap features = random_features(6, 3, 4);
  Rng rng(8);
  Eigen::VectorXd weight = Eigen::VectorXd::Constant(6, 1.0 / 6.0);
  const double base = gram(features, {weight}).nu_min;
  for (int x = 0; x < 6; ++x) {
    Eigen::VectorXd heavier = weight;
    heavier[x] += 0.3;  // unnormalized weighting: adds a psd rank-one term
    CHECK(gram(features, {heavier}).nu_min >= base - 1e-12);
  }
  (void)rng;
}

TEST_CASE("projection fixes vectors already in the span") {
  const MarkovRewardProcess mrp = five_ring();
  const auto mu = stationary_distribution(mrp);
  const FeatureMap features = random_features(5, 2, 21);
  const ProjectionOperator op(features, mu);

  Eigen::Vector2d alpha(0.7, -0.3);
  const Eigen::VectorXd f = features.matrix() * alpha;
  const auto res = op.project(f);
  CHECK((res.projected - f).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((res.coefficients - alpha).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("one-hot basis spans everything, so projection is the identity") {
  const auto mu = stationary_distribution(five_ring());
  const ProjectionOperator op(make_features(FeatureKind::kOneHot, 5, 5, 1.0, 0), mu);
  Rng rng(31);
  const Eigen::VectorXd f = random_vector(rng, 5, 3.0);
  CHECK((op.project(f).projected - f).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projection residual is mu-orthogonal and satisfies Pythagoras") {
  const MarkovRewardProcess mrp = five_ring();
  const auto mu = stationary_distribution(mrp);
  const FeatureMap features = random_features(5, 2, 33);
  const ProjectionOperator op(features, mu);
  const Eigen::VectorXd v = exact_value(mrp);
  const auto res = op.project(v);
  const Eigen::VectorXd residual = v - res.projected;
  for (int j = 0; j < features.dim(); ++j) {
    const double inner =
        (mu.mu.array() * residual.array() * features.matrix().col(j).array()).sum();
    CHECK(std::abs(inner) < 1e-9);
  }
  const double total = mu_norm(mu, v);
  const double proj = mu_norm(mu, res.projected);
  const double resid = mu_norm(mu, residual);
  CHECK(std::abs(total * total - proj * proj - resid * resid) < 1e-10);
}

TEST_CASE("projection properties over random inputs") {
  const MarkovRewardProcess mrp = five_ring();
  const auto mu = stationary_distribution(mrp);
  const FeatureMap features = random_features(5, 3, 55);
  const ProjectionOperator op(features, mu);
  Rng rng(77);

  SUBCASE("idempotence") {
    for (int trial = 0; trial < 200; ++trial) {
      const Eigen::VectorXd f = random_vector(rng, 5, 5.0);
      const Eigen::VectorXd once = op.project(f).projected;
      const Eigen::VectorXd twice = op.project(once).projected;
      REQUIRE(mu_norm(mu, once - twice) < 1e-9);
    }
  }
  SUBCASE("non-expansiveness") {
    for (int trial = 0; trial < 1000; ++trial) {
      const Eigen::VectorXd f = random_vector(rng, 5, 5.0);
      REQUIRE(mu_norm(mu, op.project(f).projected) <= mu_norm(mu, f) + 1e-10);
    }
  }
  SUBCASE("optimality over arbitrary coefficient vectors") {
    for (int trial = 0; trial < 200; ++trial) {
      const Eigen::VectorXd f = random_vector(rng, 5, 5.0);
      const double best = mu_norm(mu, f - op.project(f).projected);
      const Eigen::VectorXd beta = random_vector(rng, 3, 2.0);
      REQUIRE(best <= mu_norm(mu, f - features.matrix() * beta) + 1e-10);
    }
  }
}

TEST_CASE("two-stage projection identity for nested spans") {
  // span(Psi) is inside span(Phi) by construction Psi = Phi H^T, so
  // projecting onto G directly or through F is the same map.
  const MarkovRewardProcess mrp = five_ring();
  const auto mu = stationary_distribution(mrp);
  const FeatureMap phi = random_features(5, 4, 91);
  const ProjectionMatrix h = sample_projection(2, 4, 17);
  const FeatureMap psi = apply(h, phi);
  const ProjectionOperator op_f(phi, mu);
  const ProjectionOperator op_g(psi, mu);
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd f = random_vector(rng, 5, 5.0);
    const Eigen::VectorXd direct = op_g.project(f).projected;
    const Eigen::VectorXd staged = op_g.project(op_f.project(f).projected).projected;
    REQUIRE(mu_norm(mu, direct - staged) < 1e-9);
  }
}

TEST_CASE("singular gram weighting is refused with a condition estimate") {
  StationaryDistribution degenerate{
      (Eigen::VectorXd(5) << 0.5, 0.5, 0.0, 0.0, 0.0).finished()};
  const FeatureMap one_hot = make_features(FeatureKind::kOneHot, 5, 5, 1.0, 0);
  CHECK_THROWS_AS(ProjectionOperator(one_hot, degenerate), SingularMatrixError);
}

TEST_CASE("m_functional") {
  const FeatureMap one_hot = make_features(FeatureKind::kOneHot, 5, 5, 1.0, 0);
  CHECK(m_functional(Eigen::VectorXd::Zero(5), one_hot) == 0.0);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(5);
  e1[0] = 1.0;
  CHECK(m_functional(e1, one_hot) == doctest::Approx(1.0).epsilon(1e-12));

  const double L = 0.75;
  const int D = 4;
  const FeatureMap all_l(Eigen::MatrixXd::Constant(6, D, L), L);
  Eigen::VectorXd alpha(D);
  alpha << 1, -2, 0.5, 3;
  CHECK(m_functional(alpha, all_l) ==
        doctest::Approx(alpha.norm() * L * std::sqrt(double(D))).epsilon(1e-12));
  CHECK_THROWS_AS(m_functional(Eigen::VectorXd::Zero(3), all_l), DimensionError);
}

TEST_CASE("check_full_rank diagnostics") {
  const FeatureMap one_hot = make_features(FeatureKind::kOneHot, 5, 5, 1.0, 0);
  const RankDiagnostics diag = check_full_rank_diag(one_hot);
  CHECK(diag.full_rank);
  CHECK(diag.rank == 5);
  CHECK(diag.sigma_max == doctest::Approx(1.0));

  // Lemma 1: a fresh Gaussian projection of a full-rank map stays full rank.
  const FeatureMap phi = random_features(8, 6, 5);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const FeatureMap psi = apply(sample_projection(3, 6, seed), phi);
    REQUIRE(check_full_rank(psi));
  }
}

TEST_CASE("make_features generators") {
  SUBCASE("one_hot with D == n_states is the identity") {
    CHECK(make_features(FeatureKind::kOneHot, 4, 4, 1.0, 0).matrix() ==
          Eigen::MatrixXd::Identity(4, 4));
  }
  SUBCASE("one_hot requires D <= n_states") {
    CHECK_THROWS_AS(make_features(FeatureKind::kOneHot, 3, 5, 1.0, 0), ConfigError);
  }
  SUBCASE("random_bounded respects the bound and the seed") {
    const FeatureMap a = random_features(6, 4, 9, 0.5);
    CHECK(a.matrix().cwiseAbs().maxCoeff() <= 0.5);
    const FeatureMap b = random_features(6, 4, 9, 0.5);
    CHECK(a.matrix() == b.matrix());
  }
  SUBCASE("fourier_on_index is bounded trigonometric and full rank") {
    const FeatureMap f = make_features(FeatureKind::kFourierOnIndex, 5, 3, 2.0, 0);
    CHECK(f.matrix().cwiseAbs().maxCoeff() <= 2.0);
    CHECK(check_full_rank(f));
    for (int x = 0; x < 5; ++x) {
      CHECK(f.matrix()(x, 0) == doctest::Approx(2.0));  // j = 0 column is constant
    }
  }
}
