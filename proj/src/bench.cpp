#include "projlstd/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

#include "projlstd/csvio.hpp"
#include "projlstd/rng.hpp"
#include "projlstd/rp.hpp"

namespace projlstd::bench {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

std::string fmt_opt_double(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::string fmt_opt_int(const std::optional<int>& v) {
  return v ? format_int(*v) : std::string();
}

double elapsed_ms(const Clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::uint64_t projection_seed_for_d(const ExperimentConfig& cfg, int d) {
  return derive_seed(cfg.projection.seed, Stream::kProjection, static_cast<std::uint64_t>(d));
}

}  // namespace

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) threads.emplace_back(work);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

EstimateContext make_estimate_context(const ExperimentConfig& cfg) {
  MarkovRewardProcess mrp = build_chain(cfg.chain);
  StationaryDistribution mu = stationary_distribution(mrp);
  FeatureMap phi = build_features(cfg.features, mrp.n_states());
  Eigen::VectorXd v = exact_value(mrp);

  EstimateContext ctx{std::move(mrp), std::move(mu), std::move(phi), std::move(v)};

  const GramMatrix gram_f = gram(ctx.phi, ctx.mu);
  ctx.nu_f = gram_f.nu_min;
  const ProjectionOperator op_f(ctx.phi, ctx.mu);
  const auto proj_f = op_f.project(ctx.v_exact);
  ctx.approx_error_f = mu_norm(ctx.mu, ctx.v_exact - proj_f.projected);
  ctx.m_pi_f_v = m_functional(proj_f.coefficients, ctx.phi);

  ctx.ds = cfg.grid.ds.empty() ? std::vector<int>{cfg.projection.d} : cfg.grid.ds;

  std::vector<double> lambdas = cfg.grid.lambdas;
  if (std::find(lambdas.begin(), lambdas.end(), 0.0) == lambdas.end()) {
    lambdas.push_back(0.0);  // the plain-RP reduction always compares at lambda = 0
  }
  for (double lam : lambdas) {
    ctx.fixed_f.emplace(lam, model_fixed_point(ctx.mrp, ctx.mu, ctx.phi, lam));
  }
  for (int d : ctx.ds) {
    ProjectionMatrix h = sample_projection(d, ctx.phi.dim(), projection_seed_for_d(cfg, d));
    FeatureMap psi = apply(h, ctx.phi);
    for (double lam : lambdas) {
      ctx.fixed_g.emplace(std::make_pair(d, lam),
                          model_fixed_point(ctx.mrp, ctx.mu, psi, lam));
    }
    ctx.h_by_d.emplace(d, std::move(h));
    ctx.psi_by_d.emplace(d, std::move(psi));
  }
  return ctx;
}

namespace {

struct Cell {
  std::size_t seed_idx, n_idx, d_idx, lambda_idx;
};

std::vector<Cell> enumerate_cells(const ExperimentConfig& cfg, const EstimateContext& ctx) {
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < cfg.trajectory_seeds.size(); ++s)
    for (std::size_t ni = 0; ni < cfg.grid.ns.size(); ++ni)
      for (std::size_t di = 0; di < ctx.ds.size(); ++di)
        for (std::size_t li = 0; li < cfg.grid.lambdas.size(); ++li)
          cells.push_back({s, ni, di, li});
  return cells;
}

EstimateRow make_row(const std::string& estimator, std::uint64_t seed, std::int64_t n,
                     int d, double lambda) {
  EstimateRow row;
  row.estimator = estimator;
  row.traj_seed = seed;
  row.n = n;
  row.d = d;
  row.lambda = lambda;
  row.estimation_error = nan_value();
  row.approximation_error = nan_value();
  row.total_error = nan_value();
  row.condition_estimate = nan_value();
  return row;
}

void fill_errors(EstimateRow& row, const EstimateContext& ctx,
                 const EstimatorSolution& sol, const FeatureMap& value_space,
                 const ModelFixedPoint& fixed) {
  const Eigen::VectorXd v_hat = value_of(sol, value_space);
  row.estimation_error = mu_norm(ctx.mu, v_hat - fixed.v_fixed);
  row.approximation_error = mu_norm(ctx.mu, fixed.v_fixed - ctx.v_exact);
  row.total_error = mu_norm(ctx.mu, v_hat - ctx.v_exact);
  row.solve_kind = to_string(sol.solve_kind);
  row.condition_estimate = sol.condition_estimate;
}

// Runs the three estimators of one (seed, n, d, lambda) cell. Estimator
// failures land in the row's status; the run continues.
std::vector<EstimateRow> run_cell(const ExperimentConfig& cfg, const EstimateContext& ctx,
                                  const Cell& cell) {
  const std::uint64_t seed = cfg.trajectory_seeds[cell.seed_idx];
  const std::int64_t n = cfg.grid.ns[cell.n_idx];
  const int d = ctx.ds[cell.d_idx];
  const double lambda = cfg.grid.lambdas[cell.lambda_idx];
  const double gamma = ctx.mrp.gamma();

  const Trajectory traj = sample_trajectory(ctx.mrp, n, seed, cfg.stationary_start);
  const ProjectionMatrix& h = ctx.h_by_d.at(d);
  const FeatureMap& psi = ctx.psi_by_d.at(d);

  std::vector<EstimateRow> rows;
  {
    EstimateRow row = make_row("lstd_lambda", seed, n, d, lambda);
    try {
      const EstimatorSolution sol = lstd_lambda_batch(traj, ctx.phi, gamma, lambda);
      fill_errors(row, ctx, sol, ctx.phi, ctx.fixed_f.at(lambda));
    } catch (const Error& e) {
      row.status = e.what();
    }
    rows.push_back(std::move(row));
  }
  {
    EstimateRow row = make_row("lstd_rp", seed, n, d, 0.0);
    try {
      const EstimatorSolution sol = lstd_lambda_rp_incremental(traj, ctx.phi, h, gamma, 0.0);
      fill_errors(row, ctx, sol, psi, ctx.fixed_g.at({d, 0.0}));
    } catch (const Error& e) {
      row.status = e.what();
    }
    rows.push_back(std::move(row));
  }
  {
    EstimateRow row = make_row("lstd_lambda_rp", seed, n, d, lambda);
    try {
      const EstimatorSolution sol = lstd_lambda_rp_incremental(traj, ctx.phi, h, gamma, lambda);
      fill_errors(row, ctx, sol, psi, ctx.fixed_g.at({d, lambda}));
    } catch (const Error& e) {
      row.status = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<EstimateRow> run_estimate(const ExperimentConfig& cfg, int jobs) {
  const EstimateContext ctx = make_estimate_context(cfg);
  const std::vector<Cell> cells = enumerate_cells(cfg, ctx);
  std::vector<std::vector<EstimateRow>> per_cell(cells.size());
  parallel_for(cells.size(), jobs,
               [&](std::size_t i) { per_cell[i] = run_cell(cfg, ctx, cells[i]); });
  std::vector<EstimateRow> rows;
  rows.reserve(cells.size() * 3);
  for (auto& cell_rows : per_cell) {
    for (auto& row : cell_rows) rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

struct Accumulator {
  int count = 0;
  double est = 0.0, approx = 0.0, total = 0.0;
};

}  // namespace

SweepOutput run_sweep(const ExperimentConfig& cfg, int jobs) {
  const EstimateContext ctx = make_estimate_context(cfg);
  const std::vector<Cell> cells = enumerate_cells(cfg, ctx);
  std::vector<std::vector<EstimateRow>> per_cell(cells.size());
  parallel_for(cells.size(), jobs,
               [&](std::size_t i) { per_cell[i] = run_cell(cfg, ctx, cells[i]); });

  SweepOutput out;
  out.rows.reserve(cells.size() * 3);
  for (auto& cell_rows : per_cell) {
    for (auto& row : cell_rows) out.rows.push_back(std::move(row));
  }

  // Seed-order means per (estimator, n, d, lambda).
  std::map<std::tuple<std::string, std::int64_t, int, double>, Accumulator> acc;
  for (const auto& row : out.rows) {
    if (row.status != "ok") continue;
    auto& a = acc[{row.estimator, row.n, row.d, row.lambda}];
    ++a.count;
    a.est += row.estimation_error;
    a.approx += row.approximation_error;
    a.total += row.total_error;
  }
  const std::vector<std::string> estimators = {"lstd_lambda", "lstd_rp", "lstd_lambda_rp"};
  for (const auto& estimator : estimators) {
    for (std::int64_t n : cfg.grid.ns) {
      for (int d : ctx.ds) {
        std::vector<double> lambdas =
            estimator == "lstd_rp" ? std::vector<double>{0.0} : cfg.grid.lambdas;
        for (double lambda : lambdas) {
          auto it = acc.find({estimator, n, d, lambda});
          if (it == acc.end()) continue;
          SweepAggregate agg;
          agg.estimator = estimator;
          agg.n = n;
          agg.d = d;
          agg.lambda = lambda;
          agg.n_seeds = it->second.count;
          agg.mean_estimation_error = it->second.est / it->second.count;
          agg.mean_approximation_error = it->second.approx / it->second.count;
          agg.mean_total_error = it->second.total / it->second.count;
          agg.bound_estimation = nan_value();
          agg.bound_approximation = nan_value();
          agg.bound_total = nan_value();
          agg.approx_coeff = nan_value();
          if (estimator == "lstd_lambda_rp") {
            BoundInputs in;
            in.n = n;
            in.d = d;
            in.D = ctx.phi.dim();
            in.delta = cfg.delta;
            in.gamma = ctx.mrp.gamma();
            in.lambda = lambda;
            in.L = ctx.phi.bound();
            in.nu_f = ctx.nu_f;
            in.v_max = ctx.mrp.v_max();
            in.mixing = cfg.mixing;
            in.m_pi_f_v = ctx.m_pi_f_v;
            const BoundReport report =
                total_bound(in, ctx.approx_error_f, /*enforce_hypotheses=*/false, cfg.n0_cap);
            agg.bound_estimation = report.estimation_bound;
            agg.bound_approximation = report.approximation_bound;
            agg.bound_total = report.total_bound;
            agg.approx_coeff = approx_coefficient(in.gamma, lambda);
            agg.hypotheses_ok = report.hypotheses_ok;
          }
          out.aggregates.push_back(std::move(agg));
        }
      }
    }
  }

  auto mean_total = [&](const std::string& estimator, std::int64_t n, int d,
                        double lambda) -> std::optional<double> {
    for (const auto& agg : out.aggregates) {
      if (agg.estimator == estimator && agg.n == n && agg.d == d && agg.lambda == lambda) {
        return agg.mean_total_error;
      }
    }
    return std::nullopt;
  };
  auto bound_total = [&](std::int64_t n, int d, double lambda) -> std::optional<double> {
    for (const auto& agg : out.aggregates) {
      if (agg.estimator == "lstd_lambda_rp" && agg.n == n && agg.d == d &&
          agg.lambda == lambda && !std::isnan(agg.bound_total)) {
        return agg.bound_total;
      }
    }
    return std::nullopt;
  };

  for (std::int64_t n : cfg.grid.ns) {
    for (int d : ctx.ds) {
      SweepSummaryRow row;
      row.kind = "lambda_argmin";
      row.n = n;
      row.d = d;
      std::optional<double> best_bound_val;
      for (double lambda : cfg.grid.lambdas) {
        const auto total = mean_total("lstd_lambda_rp", n, d, lambda);
        if (total && (!row.measured_total_at_star || *total < *row.measured_total_at_star)) {
          row.measured_total_at_star = total;
          row.lambda_star_measured = lambda;
        }
        const auto bt = bound_total(n, d, lambda);
        if (bt && (!best_bound_val || *bt < *best_bound_val)) {
          best_bound_val = bt;
          row.lambda_star_bound = lambda;
        }
      }
      row.measured_total_at_lambda0 = mean_total("lstd_lambda_rp", n, d, 0.0);
      out.summary.push_back(std::move(row));
    }
    for (double lambda : cfg.grid.lambdas) {
      SweepSummaryRow row;
      row.kind = "d_argmin";
      row.n = n;
      row.lambda = lambda;
      std::optional<double> best_bound;
      for (int d : ctx.ds) {
        const auto total = mean_total("lstd_lambda_rp", n, d, lambda);
        if (total && (!row.measured_total_at_star || *total < *row.measured_total_at_star)) {
          row.measured_total_at_star = total;
          row.d_star_measured = d;
        }
        const auto bt = bound_total(n, d, lambda);
        if (bt && (!best_bound || *bt < *best_bound)) {
          best_bound = bt;
          row.d_star_bound = d;
        }
      }
      out.summary.push_back(std::move(row));
    }
  }
  return out;
}

SolveOutput run_solve(const ExperimentConfig& cfg) {
  const MarkovRewardProcess mrp = build_chain(cfg.chain);
  const StationaryDistribution mu = stationary_distribution(mrp);
  const FeatureMap phi = build_features(cfg.features, mrp.n_states());
  const Eigen::VectorXd v = exact_value(mrp);

  const GramMatrix gram_f = gram(phi, mu);
  const ProjectionOperator op_f(phi, mu);
  const auto proj_f = op_f.project(v);
  const double dist_f = mu_norm(mu, v - proj_f.projected);
  const double m_pi_f_v = m_functional(proj_f.coefficients, phi);

  const std::vector<int> ds = cfg.grid.ds.empty() ? std::vector<int>{cfg.projection.d}
                                                  : cfg.grid.ds;
  SolveOutput out;
  for (int d : ds) {
    const ProjectionMatrix h = sample_projection(d, phi.dim(), projection_seed_for_d(cfg, d));
    const FeatureMap psi = apply(h, phi);
    const GramMatrix gram_g = gram(psi, mu);
    const ProjectionOperator op_g(psi, mu);
    const double dist_g = mu_norm(mu, v - op_g.project(v).projected);

    for (double lambda : cfg.grid.lambdas) {
      const ModelFixedPoint fp = model_fixed_point(mrp, mu, psi, lambda);
      const Eigen::VectorXd image = op_g.project(bellman_lambda(mrp, lambda, fp.v_fixed)).projected;

      SolveSummaryRow row;
      row.d = d;
      row.lambda = lambda;
      row.nu_f = gram_f.nu_min;
      row.nu_g = gram_g.nu_min;
      row.dist_f = dist_f;
      row.dist_g = dist_g;
      row.fixed_residual = mu_norm(mu, fp.v_fixed - image);
      row.approx_coeff = approx_coefficient(mrp.gamma(), lambda);
      row.approx_coeff_improved = approx_coefficient(mrp.gamma(), lambda, true);
      row.lstd_rp_coeff = lstd_rp_approx_coefficient(mrp.gamma());
      row.m_pi_f_v = m_pi_f_v;
      row.v_max = mrp.v_max();
      out.summary.push_back(row);

      for (int x = 0; x < mrp.n_states(); ++x) {
        out.states.push_back({d, lambda, x, mu.mu[x], v[x], fp.v_fixed[x]});
      }

      for (std::int64_t n : cfg.grid.ns) {
        BoundInputs in;
        in.n = n;
        in.d = d;
        in.D = phi.dim();
        in.delta = cfg.delta;
        in.gamma = mrp.gamma();
        in.lambda = lambda;
        in.L = phi.bound();
        in.nu_f = gram_f.nu_min;
        in.v_max = mrp.v_max();
        in.mixing = cfg.mixing;
        in.m_pi_f_v = m_pi_f_v;
        SolveBoundsRow brow;
        brow.n = n;
        brow.d = d;
        brow.lambda = lambda;
        brow.delta = cfg.delta;
        brow.report = total_bound(in, dist_f, /*enforce_hypotheses=*/false, cfg.n0_cap);
        brow.upsilon_l7 = upsilon_lemma7(n, cfg.delta / 4.0, cfg.mixing);
        out.bounds.push_back(std::move(brow));
      }
    }
  }
  return out;
}

BenchOutput run_bench(const ExperimentConfig& cfg) {
  const MarkovRewardProcess mrp = build_chain(cfg.chain);
  const FeatureMap phi = build_features(cfg.features, mrp.n_states());
  const std::int64_t n = cfg.grid.ns.front();
  const double lambda = cfg.grid.lambdas.front();
  const double gamma = mrp.gamma();
  const int d = cfg.projection.d;

  // One shared trajectory; start-state sampling keeps setup out of the
  // timed region.
  const Trajectory traj = sample_trajectory(mrp, n, cfg.trajectory_seeds.front(), false, 0);
  const ProjectionMatrix h = sample_projection(d, phi.dim(), projection_seed_for_d(cfg, d));

  auto time_estimator = [&](auto&& run) {
    std::vector<double> totals;
    EstimatorSolution sol;
    for (int rep = 0; rep < cfg.bench.warmup + cfg.bench.repeats; ++rep) {
      const auto t0 = Clock::now();
      sol = run();
      const double ms = elapsed_ms(t0);
      if (rep >= cfg.bench.warmup) totals.push_back(ms);
    }
    std::vector<double> solves;
    for (int rep = 0; rep < cfg.bench.repeats; ++rep) {
      const auto t0 = Clock::now();
      (void)solve_theta(sol.a_hat, sol.b_hat);
      solves.push_back(elapsed_ms(t0));
    }
    BenchRow row;
    row.n = n;
    row.d = d;
    row.D = phi.dim();
    row.lambda = lambda;
    row.repeats = cfg.bench.repeats;
    row.warmup = cfg.bench.warmup;
    row.median_ms = median(totals);
    row.solve_ms = median(solves);
    row.accumulate_ms = std::max(0.0, row.median_ms - row.solve_ms);
    return row;
  };

  BenchOutput out;
  BenchRow baseline = time_estimator([&] { return lstd_lambda_batch(traj, phi, gamma, lambda); });
  baseline.estimator = "lstd_lambda";
  BenchRow projected = time_estimator(
      [&] { return lstd_lambda_rp_incremental(traj, phi, h, gamma, lambda); });
  projected.estimator = "lstd_lambda_rp";
  out.speedup = baseline.median_ms / projected.median_ms;
  out.rows.push_back(std::move(baseline));
  out.rows.push_back(std::move(projected));
  return out;
}

bool VerifyReport::all_pass() const {
  for (const auto& check : checks) {
    if (!check.pass) return false;
  }
  return true;
}

namespace {

double binomial_slack(double p, double trials) {
  const double clamped = std::min(std::max(p, 0.0), 1.0);
  return 3.0 * std::sqrt(clamped * (1.0 - clamped) / std::max(trials, 1.0));
}

std::vector<VerifyCheck> verify_jl(const ExperimentConfig& cfg, int jobs) {
  std::vector<VerifyCheck> checks;
  const VerifySpec& vs = cfg.verify;

  for (std::size_t case_idx = 0; case_idx < vs.jl_cases.size(); ++case_idx) {
    const auto [d, eps] = vs.jl_cases[case_idx];
    // A fixed pool of Gaussian test vectors, shared across draws.
    Rng vec_rng(derive_seed(cfg.master_seed, Stream::kVectors, case_idx));
    std::vector<Eigen::VectorXd> vectors(static_cast<std::size_t>(vs.jl_vectors));
    for (auto& u : vectors) {
      u.resize(vs.jl_ambient);
      for (int j = 0; j < vs.jl_ambient; ++j) u[j] = vec_rng.next_gaussian();
    }
    std::vector<DistortionRate> rates(static_cast<std::size_t>(vs.jl_draws));
    parallel_for(rates.size(), jobs, [&](std::size_t i) {
      const ProjectionMatrix h = sample_projection(
          d, vs.jl_ambient,
          derive_seed(cfg.projection.seed, Stream::kVerifyDraw, 1000 * case_idx + i));
      rates[i] = jl_distortion_rate(h, vectors, eps);
    });
    std::int64_t failures = 0, tested = 0;
    for (const auto& rate : rates) {
      failures += rate.failures;
      tested += rate.tested;
    }
    const double empirical = tested > 0 ? static_cast<double>(failures) / tested : 0.0;
    const double bound = fact1_bound(d, eps);
    const double limit = bound + binomial_slack(bound, static_cast<double>(tested));
    std::ostringstream params;
    params << "d=" << d << ";eps=" << eps << ";vectors=" << vs.jl_vectors
           << ";draws=" << vs.jl_draws << ";ambient=" << vs.jl_ambient;
    checks.push_back({"fact1_norm_preservation", params.str(), empirical, limit,
                      empirical <= limit});
  }

  {
    // Fact 2 at the smallest d the statement admits for (n, eps, delta).
    const double eps = vs.fact2_eps;
    const double delta = vs.fact2_delta;
    const int n_vec = vs.fact2_vectors;
    const int d = static_cast<int>(std::ceil(std::log(4.0 * n_vec / delta) /
                                             (eps * eps / 4.0 - eps * eps * eps / 6.0)));
    Rng vec_rng(derive_seed(cfg.master_seed, Stream::kVectors, 777));
    std::vector<Eigen::VectorXd> us(static_cast<std::size_t>(n_vec));
    for (auto& u : us) {
      u.resize(vs.jl_ambient);
      for (int j = 0; j < vs.jl_ambient; ++j) u[j] = vec_rng.next_gaussian();
    }
    Eigen::VectorXd w(vs.jl_ambient);
    for (int j = 0; j < vs.jl_ambient; ++j) w[j] = vec_rng.next_gaussian();

    std::vector<char> success(static_cast<std::size_t>(vs.fact2_draws), 0);
    parallel_for(success.size(), jobs, [&](std::size_t i) {
      const ProjectionMatrix h = sample_projection(
          d, vs.jl_ambient, derive_seed(cfg.projection.seed, Stream::kVerifyDraw, 5000 + i));
      success[i] = inner_product_distortion(h, us, w) <= eps ? 1 : 0;
    });
    double ok = 0;
    for (char s : success) ok += s;
    const double empirical = ok / vs.fact2_draws;
    const double floor = (1.0 - delta) - binomial_slack(delta, vs.fact2_draws);
    std::ostringstream params;
    params << "d=" << d << ";eps=" << eps << ";delta=" << delta << ";vectors=" << n_vec
           << ";draws=" << vs.fact2_draws;
    checks.push_back({"fact2_inner_product", params.str(), empirical, floor,
                      empirical >= floor});
  }
  return checks;
}

std::vector<VerifyCheck> verify_contraction(const ExperimentConfig& cfg, int jobs) {
  (void)jobs;
  const MarkovRewardProcess mrp = build_chain(cfg.chain);
  const StationaryDistribution mu = stationary_distribution(mrp);
  const FeatureMap phi = build_features(cfg.features, mrp.n_states());
  const ProjectionMatrix h =
      sample_projection(cfg.projection.d, phi.dim(), projection_seed_for_d(cfg, cfg.projection.d));
  const FeatureMap psi = apply(h, phi);
  const ProjectionOperator op_g(psi, mu);

  Rng rng(derive_seed(cfg.master_seed, Stream::kVectors, 42));
  const double scale = mrp.v_max();
  const int n = mrp.n_states();

  std::vector<VerifyCheck> checks;
  for (double lambda : cfg.verify.contraction_lambdas) {
    const double coeff = mrp.gamma() * (1.0 - lambda) / (1.0 - mrp.gamma() * lambda);
    int violations = 0;
    double worst_margin = 0.0;
    for (int pair = 0; pair < cfg.verify.contraction_pairs; ++pair) {
      Eigen::VectorXd f1(n), f2(n);
      for (int x = 0; x < n; ++x) {
        f1[x] = scale * (2.0 * rng.next_double() - 1.0);
        f2[x] = scale * (2.0 * rng.next_double() - 1.0);
      }
      const Eigen::VectorXd t1 = op_g.project(bellman_lambda(mrp, lambda, f1)).projected;
      const Eigen::VectorXd t2 = op_g.project(bellman_lambda(mrp, lambda, f2)).projected;
      const double lhs = mu_norm(mu, t1 - t2);
      const double rhs = coeff * mu_norm(mu, f1 - f2) + 1e-10;
      if (lhs > rhs) ++violations;
      worst_margin = std::max(worst_margin, lhs - rhs);
    }
    std::ostringstream params;
    params << "lambda=" << lambda << ";pairs=" << cfg.verify.contraction_pairs
           << ";coeff=" << coeff << ";worst_margin=" << worst_margin;
    checks.push_back({"lemma2_contraction", params.str(),
                      static_cast<double>(violations) / cfg.verify.contraction_pairs, 0.0,
                      violations == 0});
  }
  return checks;
}

std::vector<VerifyCheck> verify_gram_eig(const ExperimentConfig& cfg, int jobs) {
  const VerifySpec& vs = cfg.verify;
  const int D = vs.gram_D;
  const int d = vs.gram_d;
  const double delta = cfg.delta;

  // One-hot ambient features under a uniform weighting: nu_F = 1/D.
  Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(D, D);
  const FeatureMap phi(std::move(identity), 1.0);
  StationaryDistribution mu{Eigen::VectorXd::Constant(D, 1.0 / D)};
  const double nu_f = 1.0 / D;
  const double floor = fact3_eigen_floor(d, D, delta, nu_f);

  std::vector<char> success(static_cast<std::size_t>(vs.gram_draws), 0);
  parallel_for(success.size(), jobs, [&](std::size_t i) {
    const ProjectionMatrix h = sample_projection(
        d, D, derive_seed(cfg.projection.seed, Stream::kVerifyDraw, 9000 + i));
    const FeatureMap psi = apply(h, phi);
    const GramMatrix g = gram(psi, mu);
    success[i] = g.nu_min >= floor ? 1 : 0;
  });
  double ok = 0;
  for (char s : success) ok += s;
  const double empirical = ok / vs.gram_draws;
  const double required = (1.0 - delta) - binomial_slack(delta, vs.gram_draws);
  std::ostringstream params;
  params << "D=" << D << ";d=" << d << ";delta=" << delta << ";draws=" << vs.gram_draws
         << ";floor=" << floor;
  return {{"fact3_gram_eigenvalue", params.str(), empirical, required, empirical >= required}};
}

std::vector<VerifyCheck> verify_mixing(const ExperimentConfig& cfg, int jobs) {
  const VerifySpec& vs = cfg.verify;
  const MarkovRewardProcess mrp = build_chain(cfg.chain);
  const StationaryDistribution mu = stationary_distribution(mrp);

  // Bounded test function h = 1{x = 0}; exact mean is mu[0].
  const double expected = mu.mu[0];
  const double radius = mixing_hoeffding_radius(vs.mixing_n, cfg.delta, 1.0, cfg.mixing);

  std::vector<char> exceed(static_cast<std::size_t>(vs.mixing_trajectories), 0);
  parallel_for(exceed.size(), jobs, [&](std::size_t i) {
    const Trajectory traj = sample_trajectory(
        mrp, vs.mixing_n, derive_seed(cfg.trajectory_seeds.front(), Stream::kVerifyDraw, i),
        true);
    double sum = 0.0;
    for (int x : traj.states) sum += x == 0 ? 1.0 : 0.0;
    const double avg = sum / static_cast<double>(vs.mixing_n);
    exceed[i] = std::abs(avg - expected) > radius ? 1 : 0;
  });
  double count = 0;
  for (char e : exceed) count += e;
  const double empirical = count / vs.mixing_trajectories;
  const double limit = cfg.delta + binomial_slack(cfg.delta, vs.mixing_trajectories);
  std::ostringstream params;
  params << "n=" << vs.mixing_n << ";delta=" << cfg.delta
         << ";trajectories=" << vs.mixing_trajectories << ";radius=" << radius;
  return {{"lemma7_mixing_hoeffding", params.str(), empirical, limit, empirical <= limit}};
}

std::vector<VerifyCheck> verify_bounds_cert(const ExperimentConfig& cfg, int jobs) {
  const VerifySpec& vs = cfg.verify;
  const int D = vs.cert_D;
  const int d = vs.cert_d;
  const std::int64_t n = vs.cert_n;
  const double lambda = vs.cert_lambda;
  const double delta = cfg.delta;

  ChainParams params;
  params.stay = 0.1;
  params.gamma = cfg.chain.gamma;
  params.r_max = cfg.chain.r_max;
  params.reward_kind = RewardKind::kRandomUniform;
  const MarkovRewardProcess mrp = make_chain(ChainKind::kRing, D, params, cfg.chain.seed);
  const StationaryDistribution mu = stationary_distribution(mrp);
  const FeatureMap phi = make_features(FeatureKind::kOneHot, D, D, 1.0, cfg.features.seed);
  const Eigen::VectorXd v = exact_value(mrp);
  const GramMatrix gram_f = gram(phi, mu);

  BoundInputs in;
  in.n = n;
  in.d = d;
  in.D = D;
  in.delta = delta;
  in.gamma = mrp.gamma();
  in.lambda = lambda;
  in.L = phi.bound();
  in.nu_f = gram_f.nu_min;
  in.v_max = mrp.v_max();
  in.mixing = cfg.mixing;
  const double bound = estimation_bound(in);  // throws if hypotheses fail
  const double coeff = approx_coefficient(mrp.gamma(), lambda);

  std::vector<char> within(static_cast<std::size_t>(vs.cert_runs), 0);
  std::vector<char> det_holds(static_cast<std::size_t>(vs.cert_runs), 0);
  parallel_for(within.size(), jobs, [&](std::size_t i) {
    const ProjectionMatrix h = sample_projection(
        d, D, derive_seed(cfg.projection.seed, Stream::kVerifyDraw, 20000 + i));
    const FeatureMap psi = apply(h, phi);
    const ModelFixedPoint fp = model_fixed_point(mrp, mu, psi, lambda);
    const Trajectory traj = sample_trajectory(
        mrp, n, derive_seed(cfg.trajectory_seeds.front(), Stream::kVerifyDraw, 30000 + i),
        true);
    const EstimatorSolution sol = lstd_lambda_rp_incremental(traj, phi, h, mrp.gamma(), lambda);
    const double est_err = mu_norm(mu, value_of(sol, psi) - fp.v_fixed);
    within[i] = est_err <= bound ? 1 : 0;

    const ProjectionOperator op_g(psi, mu);
    const double lhs = mu_norm(mu, v - fp.v_fixed);
    const double rhs = coeff * mu_norm(mu, v - op_g.project(v).projected) + 1e-9;
    det_holds[i] = lhs <= rhs ? 1 : 0;
  });

  double ok = 0, det = 0;
  for (std::size_t i = 0; i < within.size(); ++i) {
    ok += within[i];
    det += det_holds[i];
  }
  std::vector<VerifyCheck> checks;
  {
    const double empirical = ok / vs.cert_runs;
    const double required = (1.0 - delta) - binomial_slack(delta, vs.cert_runs);
    std::ostringstream p;
    p << "n=" << n << ";d=" << d << ";D=" << D << ";lambda=" << lambda << ";delta=" << delta
      << ";runs=" << vs.cert_runs << ";bound=" << bound;
    checks.push_back({"theorem4_estimation_cert", p.str(), empirical, required,
                      empirical >= required});
  }
  {
    const double empirical = det / vs.cert_runs;
    std::ostringstream p;
    p << "lambda=" << lambda << ";coeff=" << coeff << ";runs=" << vs.cert_runs;
    checks.push_back({"theorem5_step1_deterministic", p.str(), empirical, 1.0,
                      empirical >= 1.0});
  }
  return checks;
}

}  // namespace

VerifyReport run_verify(const ExperimentConfig& cfg, const std::string& suite, int jobs) {
  VerifyReport report;
  auto append = [&](std::vector<VerifyCheck> checks) {
    for (auto& check : checks) report.checks.push_back(std::move(check));
  };
  bool known = false;
  if (suite == "jl" || suite == "all") {
    append(verify_jl(cfg, jobs));
    known = true;
  }
  if (suite == "contraction" || suite == "all") {
    append(verify_contraction(cfg, jobs));
    known = true;
  }
  if (suite == "gram_eig" || suite == "all") {
    append(verify_gram_eig(cfg, jobs));
    known = true;
  }
  if (suite == "mixing" || suite == "all") {
    append(verify_mixing(cfg, jobs));
    known = true;
  }
  if (suite == "bounds_cert" || suite == "all") {
    append(verify_bounds_cert(cfg, jobs));
    known = true;
  }
  if (!known) {
    throw ConfigError("unknown verify suite: " + suite +
                      " (expected jl|contraction|gram_eig|mixing|bounds_cert|all)");
  }
  return report;
}

namespace {

void write_estimate_rows(const fs::path& path, const ExperimentConfig& cfg,
                         const std::vector<EstimateRow>& rows) {
  const std::string hash = config_hash(cfg);
  CsvWriter csv(path, {"config_hash", "estimator", "traj_seed", "n", "d", "lambda",
                       "estimation_error", "approximation_error", "total_error",
                       "solve_kind", "condition_estimate", "status"});
  for (const auto& row : rows) {
    csv.row({hash, row.estimator, format_uint(row.traj_seed), format_int(row.n),
             format_int(row.d), format_double(row.lambda),
             format_double(row.estimation_error), format_double(row.approximation_error),
             format_double(row.total_error), row.solve_kind,
             format_double(row.condition_estimate), row.status});
  }
  write_meta_sidecar(path, resolved_config_json(cfg), hash);
}

}  // namespace

int cmd_estimate(const ExperimentConfig& cfg, const std::string& out_dir, int jobs) {
  fs::create_directories(out_dir);
  const auto rows = run_estimate(cfg, jobs);
  write_estimate_rows(fs::path(out_dir) / "estimate.csv", cfg, rows);
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::string& out_dir, int jobs) {
  fs::create_directories(out_dir);
  const SweepOutput out = run_sweep(cfg, jobs);
  const std::string hash = config_hash(cfg);

  write_estimate_rows(fs::path(out_dir) / "sweep.csv", cfg, out.rows);
  {
    CsvWriter csv(fs::path(out_dir) / "sweep_aggregates.csv",
                  {"config_hash", "estimator", "n", "d", "lambda", "n_seeds",
                   "mean_estimation_error", "mean_approximation_error", "mean_total_error",
                   "bound_estimation", "bound_approximation", "bound_total", "approx_coeff",
                   "hypotheses_ok"});
    for (const auto& agg : out.aggregates) {
      csv.row({hash, agg.estimator, format_int(agg.n), format_int(agg.d),
               format_double(agg.lambda), format_int(agg.n_seeds),
               format_double(agg.mean_estimation_error),
               format_double(agg.mean_approximation_error),
               format_double(agg.mean_total_error), format_double(agg.bound_estimation),
               format_double(agg.bound_approximation), format_double(agg.bound_total),
               format_double(agg.approx_coeff), agg.hypotheses_ok ? "true" : "false"});
    }
    write_meta_sidecar(fs::path(out_dir) / "sweep_aggregates.csv",
                       resolved_config_json(cfg), hash);
  }
  {
    CsvWriter csv(fs::path(out_dir) / "sweep_summary.csv",
                  {"config_hash", "kind", "n", "d", "lambda", "lambda_star_measured",
                   "d_star_measured", "measured_total_at_star", "measured_total_at_lambda0",
                   "lambda_star_bound", "d_star_bound"});
    for (const auto& row : out.summary) {
      csv.row({hash, row.kind, format_int(row.n),
               row.kind == "lambda_argmin" ? format_int(row.d) : std::string(),
               row.kind == "d_argmin" ? format_double(row.lambda) : std::string(),
               fmt_opt_double(row.lambda_star_measured), fmt_opt_int(row.d_star_measured),
               fmt_opt_double(row.measured_total_at_star),
               fmt_opt_double(row.measured_total_at_lambda0),
               fmt_opt_double(row.lambda_star_bound), fmt_opt_int(row.d_star_bound)});
    }
    write_meta_sidecar(fs::path(out_dir) / "sweep_summary.csv", resolved_config_json(cfg),
                       hash);
  }
  return 0;
}

int cmd_solve(const ExperimentConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const SolveOutput out = run_solve(cfg);
  const std::string hash = config_hash(cfg);

  {
    CsvWriter csv(fs::path(out_dir) / "solve_states.csv",
                  {"config_hash", "d", "lambda", "state", "mu", "v", "v_fixed"});
    for (const auto& row : out.states) {
      csv.row({hash, format_int(row.d), format_double(row.lambda), format_int(row.state),
               format_double(row.mu), format_double(row.v), format_double(row.v_fixed)});
    }
    write_meta_sidecar(fs::path(out_dir) / "solve_states.csv", resolved_config_json(cfg), hash);
  }
  {
    CsvWriter csv(fs::path(out_dir) / "solve_summary.csv",
                  {"config_hash", "d", "lambda", "nu_f", "nu_g", "dist_f", "dist_g",
                   "fixed_residual", "approx_coeff", "approx_coeff_improved", "lstd_rp_coeff",
                   "m_pi_f_v", "v_max"});
    for (const auto& row : out.summary) {
      csv.row({hash, format_int(row.d), format_double(row.lambda), format_double(row.nu_f),
               format_double(row.nu_g), format_double(row.dist_f), format_double(row.dist_g),
               format_double(row.fixed_residual), format_double(row.approx_coeff),
               format_double(row.approx_coeff_improved), format_double(row.lstd_rp_coeff),
               format_double(row.m_pi_f_v), format_double(row.v_max)});
    }
    write_meta_sidecar(fs::path(out_dir) / "solve_summary.csv", resolved_config_json(cfg), hash);
  }
  {
    CsvWriter csv(fs::path(out_dir) / "bounds.csv",
                  {"config_hash", "n", "d", "lambda", "delta", "m_n_lambda", "xi", "eta",
                   "lambda_val", "i_val", "upsilon_t5", "upsilon_l7", "n0_found", "n0",
                   "estimation_bound", "approximation_bound", "total_bound", "h_term_omitted",
                   "hypotheses_ok"});
    for (const auto& row : out.bounds) {
      const BoundReport& rep = row.report;
      csv.row({hash, format_int(row.n), format_int(row.d), format_double(row.lambda),
               format_double(row.delta), format_int(rep.m_n_lambda), format_double(rep.xi),
               format_double(rep.eta), format_double(rep.lambda_val), format_double(rep.i_val),
               format_double(rep.upsilon_val), format_double(row.upsilon_l7),
               rep.n0 ? "true" : "false", rep.n0 ? format_int(*rep.n0) : std::string(),
               format_double(rep.estimation_bound), format_double(rep.approximation_bound),
               format_double(rep.total_bound), rep.h_term_omitted ? "true" : "false",
               rep.hypotheses_ok ? "true" : "false"});
    }
    write_meta_sidecar(fs::path(out_dir) / "bounds.csv", resolved_config_json(cfg), hash);
  }
  return 0;
}

int cmd_bench(const ExperimentConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const BenchOutput out = run_bench(cfg);
  const std::string hash = config_hash(cfg);
  CsvWriter csv(fs::path(out_dir) / "bench.csv",
                {"config_hash", "estimator", "n", "d", "D", "lambda", "repeats", "warmup",
                 "median_ms", "solve_ms", "accumulate_ms", "speedup_vs_baseline"});
  for (const auto& row : out.rows) {
    csv.row({hash, row.estimator, format_int(row.n), format_int(row.d), format_int(row.D),
             format_double(row.lambda), format_int(row.repeats), format_int(row.warmup),
             format_double(row.median_ms), format_double(row.solve_ms),
             format_double(row.accumulate_ms),
             row.estimator == "lstd_lambda_rp" ? format_double(out.speedup) : std::string()});
  }
  write_meta_sidecar(fs::path(out_dir) / "bench.csv", resolved_config_json(cfg), hash);
  return 0;
}

int cmd_verify(const ExperimentConfig& cfg, const std::string& out_dir,
               const std::string& suite, int jobs) {
  fs::create_directories(out_dir);
  const VerifyReport report = run_verify(cfg, suite, jobs);
  const std::string hash = config_hash(cfg);
  CsvWriter csv(fs::path(out_dir) / "verify.csv",
                {"config_hash", "fact_id", "params", "empirical", "bound", "pass"});
  for (const auto& check : report.checks) {
    csv.row({hash, check.fact_id, check.params, format_double(check.empirical),
             format_double(check.bound), check.pass ? "true" : "false"});
  }
  write_meta_sidecar(fs::path(out_dir) / "verify.csv", resolved_config_json(cfg), hash);
  return report.all_pass() ? 0 : 2;
}

}  // namespace projlstd::bench
