#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "projlstd/bench.hpp"
#include "projlstd/bounds.hpp"
#include "projlstd/chain.hpp"
#include "projlstd/features.hpp"
#include "projlstd/lstd.hpp"
#include "projlstd/rng.hpp"
#include "projlstd/rp.hpp"

namespace py = pybind11;
using namespace projlstd;

namespace {

ChainKind chain_kind_from(const std::string& kind) {
  if (kind == "ring") return ChainKind::kRing;
  if (kind == "random_ergodic") return ChainKind::kRandomErgodic;
  if (kind == "chain_walk") return ChainKind::kChainWalk;
  throw ConfigError("unknown chain kind: " + kind);
}

FeatureKind feature_kind_from(const std::string& kind) {
  if (kind == "one_hot") return FeatureKind::kOneHot;
  if (kind == "random_bounded") return FeatureKind::kRandomBounded;
  if (kind == "fourier_on_index") return FeatureKind::kFourierOnIndex;
  throw ConfigError("unknown feature kind: " + kind);
}

}  // namespace

PYBIND11_MODULE(_projlstd, m) {
  m.doc() = "LSTD(lambda)-RP policy evaluation: chains, projections, estimators, bounds";

  py::register_exception<DomainError>(m, "BoundDomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<Error>(m, "ProjlstdError", PyExc_RuntimeError);

  py::class_<MarkovRewardProcess>(m, "MarkovRewardProcess")
      .def(py::init<Eigen::MatrixXd, Eigen::VectorXd, double, double>(),
           py::arg("transition"), py::arg("rewards"), py::arg("gamma"), py::arg("r_max"))
      .def_property_readonly("n_states", &MarkovRewardProcess::n_states)
      .def_property_readonly("transition", &MarkovRewardProcess::transition)
      .def_property_readonly("rewards", &MarkovRewardProcess::rewards)
      .def_property_readonly("gamma", &MarkovRewardProcess::gamma)
      .def_property_readonly("r_max", &MarkovRewardProcess::r_max)
      .def_property_readonly("v_max", &MarkovRewardProcess::v_max)
      .def_property_readonly("period", &MarkovRewardProcess::period)
      .def_property_readonly("is_ergodic", &MarkovRewardProcess::is_ergodic);

  py::class_<Trajectory>(m, "Trajectory")
      .def(py::init([](std::vector<int> states, Eigen::VectorXd rewards) {
             Trajectory t;
             t.states = std::move(states);
             t.rewards = std::move(rewards);
             return t;
           }),
           py::arg("states"), py::arg("rewards"))
      .def_readonly("states", &Trajectory::states)
      .def_readonly("rewards", &Trajectory::rewards)
      .def_readonly("seed", &Trajectory::seed)
      .def_readonly("stationary_start", &Trajectory::stationary_start)
      .def("__len__", [](const Trajectory& t) { return t.states.size(); });

  m.def(
      "make_chain",
      [](const std::string& kind, int n_states, double gamma, double r_max, double stay,
         double noise, const std::string& reward_kind,
         std::optional<Eigen::VectorXd> rewards, std::uint64_t seed) {
        ChainParams params;
        params.stay = stay;
        params.noise = noise;
        params.gamma = gamma;
        params.r_max = r_max;
        if (rewards) {
          params.reward_kind = RewardKind::kExplicit;
          params.rewards = *rewards;
        } else if (reward_kind == "random_uniform") {
          params.reward_kind = RewardKind::kRandomUniform;
        } else {
          params.reward_kind = RewardKind::kUnitFirst;
        }
        return make_chain(chain_kind_from(kind), n_states, params, seed);
      },
      py::arg("kind"), py::arg("n_states"), py::arg("gamma") = 0.9, py::arg("r_max") = 1.0,
      py::arg("stay") = 0.1, py::arg("noise") = 0.1, py::arg("reward_kind") = "unit_first",
      py::arg("rewards") = std::nullopt, py::arg("seed") = 0);

  m.def("stationary_distribution",
        [](const MarkovRewardProcess& mrp) { return stationary_distribution(mrp).mu; });
  m.def("exact_value", &exact_value);
  m.def("bellman", &bellman, py::arg("mrp"), py::arg("f"));
  m.def("bellman_lambda", &bellman_lambda, py::arg("mrp"), py::arg("lambda_"), py::arg("f"));
  m.def(
      "mu_norm",
      [](const Eigen::VectorXd& mu, const Eigen::VectorXd& f) {
        return mu_norm(StationaryDistribution{mu}, f);
      },
      py::arg("mu"), py::arg("f"));
  m.def("sample_trajectory", &sample_trajectory, py::arg("mrp"), py::arg("n"), py::arg("seed"),
        py::arg("stationary_start") = true, py::arg("start_state") = 0);

  py::class_<FeatureMap>(m, "FeatureMap")
      .def(py::init<Eigen::MatrixXd, double>(), py::arg("phi"), py::arg("bound"))
      .def_property_readonly("matrix", &FeatureMap::matrix)
      .def_property_readonly("dim", &FeatureMap::dim)
      .def_property_readonly("n_states", &FeatureMap::n_states)
      .def_property_readonly("bound", &FeatureMap::bound)
      .def("max_row_norm", &FeatureMap::max_row_norm);

  m.def(
      "make_features",
      [](const std::string& kind, int n_states, int D, double L, std::uint64_t seed) {
        return make_features(feature_kind_from(kind), n_states, D, L, seed);
      },
      py::arg("kind"), py::arg("n_states"), py::arg("D"), py::arg("L") = 1.0,
      py::arg("seed") = 0);

  py::class_<GramMatrix>(m, "GramMatrix")
      .def_readonly("m", &GramMatrix::m)
      .def_readonly("nu_min", &GramMatrix::nu_min)
      .def_readonly("nu_max", &GramMatrix::nu_max);
  m.def(
      "gram",
      [](const FeatureMap& f, const Eigen::VectorXd& mu) {
        return gram(f, StationaryDistribution{mu});
      },
      py::arg("features"), py::arg("mu"));

  py::class_<RankDiagnostics>(m, "RankDiagnostics")
      .def_readonly("full_rank", &RankDiagnostics::full_rank)
      .def_readonly("rank", &RankDiagnostics::rank)
      .def_readonly("sigma_max", &RankDiagnostics::sigma_max)
      .def_readonly("sigma_min", &RankDiagnostics::sigma_min)
      .def_readonly("threshold", &RankDiagnostics::threshold);
  m.def("check_full_rank", &check_full_rank);
  m.def("check_full_rank_diag", &check_full_rank_diag);
  m.def("m_functional", &m_functional, py::arg("alpha"), py::arg("features"));

  py::class_<ProjectionOperator>(m, "ProjectionOperator")
      .def(py::init([](const FeatureMap& basis, const Eigen::VectorXd& mu) {
             return ProjectionOperator(basis, StationaryDistribution{mu});
           }),
           py::arg("basis"), py::arg("mu"))
      .def(
          "project",
          [](const ProjectionOperator& op, const Eigen::VectorXd& f) {
            auto res = op.project(f);
            return py::make_tuple(res.projected, res.coefficients);
          },
          py::arg("f"));

  py::class_<ProjectionMatrix>(m, "ProjectionMatrix")
      .def_readonly("h", &ProjectionMatrix::h)
      .def_readonly("seed", &ProjectionMatrix::seed)
      .def_property_readonly("d", &ProjectionMatrix::d)
      .def_property_readonly("ambient_dim", &ProjectionMatrix::ambient_dim)
      .def_static("identity", &ProjectionMatrix::identity, py::arg("dim"))
      .def_static("from_matrix", &ProjectionMatrix::from_matrix, py::arg("h"));
  m.def("sample_projection", &sample_projection, py::arg("d"), py::arg("D"), py::arg("seed"));
  m.def("apply_projection", &apply, py::arg("h"), py::arg("features"));

  py::class_<DistortionRate>(m, "DistortionRate")
      .def_readonly("failure_fraction", &DistortionRate::failure_fraction)
      .def_readonly("failures", &DistortionRate::failures)
      .def_readonly("tested", &DistortionRate::tested)
      .def_readonly("skipped", &DistortionRate::skipped);
  m.def("jl_distortion_rate", &jl_distortion_rate, py::arg("h"), py::arg("vectors"),
        py::arg("eps"));
  m.def("inner_product_distortion", &inner_product_distortion, py::arg("h"), py::arg("us"),
        py::arg("w"));
  m.def("fact1_bound", &fact1_bound, py::arg("d"), py::arg("eps"));
  m.def("fact3_eigen_floor", &fact3_eigen_floor, py::arg("d"), py::arg("D"), py::arg("delta"),
        py::arg("nu_f"));

  py::class_<EstimatorSolution>(m, "EstimatorSolution")
      .def_readonly("a_hat", &EstimatorSolution::a_hat)
      .def_readonly("b_hat", &EstimatorSolution::b_hat)
      .def_readonly("theta", &EstimatorSolution::theta)
      .def_property_readonly(
          "solve_kind",
          [](const EstimatorSolution& s) { return std::string(to_string(s.solve_kind)); })
      .def_readonly("condition_estimate", &EstimatorSolution::condition_estimate)
      .def_readonly("n_transitions", &EstimatorSolution::n_transitions);

  py::class_<ModelFixedPoint>(m, "ModelFixedPoint")
      .def_readonly("a", &ModelFixedPoint::a)
      .def_readonly("b", &ModelFixedPoint::b)
      .def_readonly("theta_star", &ModelFixedPoint::theta_star)
      .def_readonly("v_fixed", &ModelFixedPoint::v_fixed);

  m.def("lstd_lambda_batch", &lstd_lambda_batch, py::arg("trajectory"), py::arg("features"),
        py::arg("gamma"), py::arg("lambda_"));
  m.def("lstd_lambda_rp_incremental", &lstd_lambda_rp_incremental, py::arg("trajectory"),
        py::arg("features_phi"), py::arg("h"), py::arg("gamma"), py::arg("lambda_"));
  m.def(
      "model_fixed_point",
      [](const MarkovRewardProcess& mrp, const Eigen::VectorXd& mu,
         const FeatureMap& features_psi, double lambda) {
        return model_fixed_point(mrp, StationaryDistribution{mu}, features_psi, lambda);
      },
      py::arg("mrp"), py::arg("mu"), py::arg("features_psi"), py::arg("lambda_"));
  m.def(
      "solve_theta",
      [](const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
        auto res = solve_theta(a, b);
        return py::make_tuple(res.theta, std::string(to_string(res.solve_kind)),
                              res.condition_estimate);
      },
      py::arg("a_hat"), py::arg("b_hat"));
  m.def("value_of", &value_of, py::arg("solution"), py::arg("features"));

  py::class_<MixingParams>(m, "MixingParams")
      .def(py::init<>())
      .def(py::init([](double beta0, double beta1, double kappa) {
             return MixingParams{beta0, beta1, kappa};
           }),
           py::arg("beta0") = 1.0, py::arg("beta1") = 1.0, py::arg("kappa") = 1.0)
      .def_readwrite("beta0", &MixingParams::beta0)
      .def_readwrite("beta1", &MixingParams::beta1)
      .def_readwrite("kappa", &MixingParams::kappa);

  py::class_<BoundInputs>(m, "BoundInputs")
      .def(py::init<>())
      .def_readwrite("n", &BoundInputs::n)
      .def_readwrite("d", &BoundInputs::d)
      .def_readwrite("D", &BoundInputs::D)
      .def_readwrite("delta", &BoundInputs::delta)
      .def_readwrite("gamma", &BoundInputs::gamma)
      .def_readwrite("lambda_", &BoundInputs::lambda)
      .def_readwrite("L", &BoundInputs::L)
      .def_readwrite("nu_f", &BoundInputs::nu_f)
      .def_readwrite("v_max", &BoundInputs::v_max)
      .def_readwrite("mixing", &BoundInputs::mixing)
      .def_readwrite("m_pi_f_v", &BoundInputs::m_pi_f_v);

  py::class_<N0Result>(m, "N0Result")
      .def_readonly("found", &N0Result::found)
      .def_readonly("n0", &N0Result::n0)
      .def_readonly("cap", &N0Result::cap)
      .def_readonly("lhs_at_cap", &N0Result::lhs_at_cap);

  py::class_<BoundReport>(m, "BoundReport")
      .def_readonly("m_n_lambda", &BoundReport::m_n_lambda)
      .def_readonly("xi", &BoundReport::xi)
      .def_readonly("eta", &BoundReport::eta)
      .def_readonly("lambda_val", &BoundReport::lambda_val)
      .def_readonly("i_val", &BoundReport::i_val)
      .def_readonly("upsilon_val", &BoundReport::upsilon_val)
      .def_readonly("n0", &BoundReport::n0)
      .def_readonly("estimation_bound", &BoundReport::estimation_bound)
      .def_readonly("approximation_bound", &BoundReport::approximation_bound)
      .def_readonly("total_bound", &BoundReport::total_bound)
      .def_readonly("h_term_omitted", &BoundReport::h_term_omitted)
      .def_readonly("hypotheses_ok", &BoundReport::hypotheses_ok);

  m.def("m_n_lambda", &m_n_lambda, py::arg("n"), py::arg("lambda_"), py::arg("gamma"));
  m.def("xi", &xi, py::arg("n"), py::arg("d"), py::arg("delta"));
  m.def("eta", &eta, py::arg("d"), py::arg("D"), py::arg("delta"));
  m.def("lambda_fn", &lambda_fn, py::arg("n"), py::arg("delta"), py::arg("mixing"));
  m.def("i_fn", &i_fn, py::arg("n"), py::arg("delta"), py::arg("mixing"));
  m.def("upsilon_theorem5", &upsilon_theorem5, py::arg("n"), py::arg("delta"), py::arg("mixing"));
  m.def("upsilon_lemma7", &upsilon_lemma7, py::arg("n"), py::arg("delta"), py::arg("mixing"));
  m.def("sample_size_lhs", &sample_size_lhs, py::arg("inputs"), py::arg("n"));
  m.def("n0", &n0, py::arg("inputs"), py::arg("cap") = 1'000'000'000LL);
  m.def("estimation_bound", &estimation_bound, py::arg("inputs"),
        py::arg("enforce_hypotheses") = true);
  m.def("approx_coefficient", &approx_coefficient, py::arg("gamma"), py::arg("lambda_"),
        py::arg("improved") = false);
  m.def("lstd_rp_approx_coefficient", &lstd_rp_approx_coefficient, py::arg("gamma"));
  m.def("approximation_bound", &approximation_bound, py::arg("inputs"),
        py::arg("approx_error_f"), py::arg("improved") = false,
        py::arg("enforce_hypotheses") = true);
  m.def("total_bound", &total_bound, py::arg("inputs"), py::arg("approx_error_f"),
        py::arg("enforce_hypotheses") = true, py::arg("n0_cap") = 1'000'000'000LL);
  m.def("mixing_hoeffding_radius", &mixing_hoeffding_radius, py::arg("n"), py::arg("delta"),
        py::arg("m_h"), py::arg("mixing"));

  m.def("derive_seed",
        py::overload_cast<std::uint64_t, std::uint64_t, std::uint64_t>(&derive_seed),
        py::arg("seed"), py::arg("stream_tag"), py::arg("index") = 0);
}
