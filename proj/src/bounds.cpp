#include "projlstd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace projlstd {

namespace {

const double kFourESquared = 4.0 * std::exp(2.0);

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError("delta must lie in (0, 1)");
  }
}

// D > d + 2 sqrt(2 d log(c/delta)) + 2 log(c/delta); equivalent to
// eta(d, D, 2 delta / c) having a positive inner expression.
bool dimension_hypothesis_holds(int d, int D, double log_c_over_delta) {
  return D > d + 2.0 * std::sqrt(2.0 * d * log_c_over_delta) + 2.0 * log_c_over_delta;
}

}  // namespace

std::int64_t m_n_lambda(std::int64_t n, double lambda, double gamma) {
  if (n < 2) throw DomainError("m_n_lambda requires n >= 2");
  if (lambda == 0.0) return 0;
  const long double lg = static_cast<long double>(lambda) * gamma;
  if (lg == 0.0L) return 0;  // gamma = 0: the trace has no memory
  if (!(lg < 1.0L)) {
    throw DomainError("m_n_lambda requires lambda*gamma < 1");
  }
  const long double v = std::log(static_cast<long double>(n - 1)) / std::log(1.0L / lg);
  const long double nearest = std::round(v);
  // Snap values that are integers up to floating-point noise, so the ceiling
  // is exact for ratios like log(100)/log(10).
  if (std::abs(v - nearest) < 1e-9L) return static_cast<std::int64_t>(nearest);
  return static_cast<std::int64_t>(std::ceil(v));
}

double xi(std::int64_t n, int d, double delta) {
  check_delta(delta);
  if (n < 1 || d < 1) throw DomainError("xi requires n >= 1 and d >= 1");
  const double log_term = std::log(static_cast<double>(n) / delta);
  if (log_term < 0.0) throw DomainError("xi requires n/delta >= 1");
  return 1.0 + std::sqrt((8.0 / d) * log_term);
}

double eta(int d, int D, double delta) {
  check_delta(delta);
  if (d < 1 || D < 1) throw DomainError("eta requires d >= 1 and D >= 1");
  const double inner = 1.0 - std::sqrt(static_cast<double>(d) / D) -
                       std::sqrt(2.0 * std::log(2.0 / delta) / D);
  if (inner <= 0.0) {
    std::ostringstream msg;
    msg << "eta is outside its domain: D = " << D
        << " is too small for d = " << d << " at delta = " << delta;
    throw DomainError(msg.str());
  }
  return inner * inner;
}

double lambda_fn(std::int64_t n, double delta, const MixingParams& mixing) {
  check_delta(delta);
  if (n < 1) throw DomainError("Lambda requires n >= 1");
  const double nn = static_cast<double>(n);
  return std::log(8.0 * nn * nn / delta) + std::log(std::max(kFourESquared, nn * mixing.beta0));
}

double i_fn(std::int64_t n, double delta, const MixingParams& mixing) {
  const double lam = lambda_fn(n, delta, mixing);
  return 32.0 * lam * std::pow(std::max(lam / mixing.beta1, 1.0), 1.0 / mixing.kappa);
}

double upsilon_theorem5(std::int64_t n, double delta, const MixingParams& mixing) {
  check_delta(delta);
  const double log_term = std::log((4.0 + static_cast<double>(n) * mixing.beta0) / delta);
  return std::pow(log_term, 1.0 + 1.0 / mixing.kappa) *
         std::pow(mixing.beta1, -1.0 / mixing.kappa);
}

double upsilon_lemma7(std::int64_t n, double delta, const MixingParams& mixing) {
  check_delta(delta);
  const double x = std::log(1.0 / delta) + std::log(4.0 + static_cast<double>(n) * mixing.beta0);
  return x * std::pow(x / mixing.beta1, 1.0 / mixing.kappa);
}

double sample_size_lhs(const BoundInputs& in, std::int64_t n) {
  if (n < 2) throw DomainError("sample_size_lhs requires n >= 2");
  const long double eta_val = eta(in.d, in.D, in.delta / 2.0);
  const long double xi_val = xi(n, in.d, in.delta / 4.0);
  const long double i_val = i_fn(n - 1, in.delta / 2.0, in.mixing);
  const long double m = static_cast<long double>(m_n_lambda(n, in.lambda, in.gamma));
  const long double lg = static_cast<long double>(in.lambda) * in.gamma;
  const long double n1 = static_cast<long double>(n - 1);

  const long double prefactor =
      2.0L * in.d * in.L * in.L /
      ((1.0L - in.gamma) * static_cast<long double>(in.nu_f) * eta_val);
  const long double term1 = (2.0L * xi_val / std::sqrt(n1)) * std::sqrt((1.0L + m) * i_val);
  const long double term2 = (2.0L * xi_val / n1) * m;
  const long double term3 = 1.0L / ((1.0L - lg) * n1);
  return static_cast<double>(prefactor * (term1 + term2 + term3));
}

namespace {

constexpr std::int64_t kPrescanLimit = 4096;

// n values at which m_n_lambda jumps up (the only upward jumps of the LHS);
// between consecutive boundaries the LHS is monotone decreasing once n is
// past the prescan range.
std::vector<std::int64_t> staircase_boundaries(const BoundInputs& in, std::int64_t cap) {
  std::vector<std::int64_t> out;
  if (in.lambda == 0.0) return out;
  const double inv_lg = 1.0 / (in.lambda * in.gamma);
  double power = 1.0;
  for (int m = 1; m < 4096; ++m) {
    power *= inv_lg;
    if (power > static_cast<double>(cap) * 2.0) break;
    // candidate first n with m_n_lambda >= m + 1: n - 1 just above power
    std::int64_t guess = static_cast<std::int64_t>(std::floor(power)) + 2;
    for (std::int64_t c = std::max<std::int64_t>(2, guess - 4); c <= guess + 4 && c <= cap; ++c) {
      if (c > 2 && m_n_lambda(c, in.lambda, in.gamma) > m_n_lambda(c - 1, in.lambda, in.gamma)) {
        out.push_back(c);
        break;
      }
    }
  }
  // The Lambda branch switch max{4e^2, n beta0} is continuous, not a jump,
  // so it does not need a boundary here.
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

N0Result n0(const BoundInputs& in, std::int64_t cap) {
  if (cap < 2) throw DomainError("n0 cap must be at least 2");
  (void)eta(in.d, in.D, in.delta / 2.0);  // hypothesis check up front

  auto ok = [&](std::int64_t n) { return sample_size_lhs(in, n) < 1.0; };

  N0Result result;
  result.cap = cap;

  // Small-n linear prescan; covers the region where monotonicity in each
  // segment has not kicked in yet.
  const std::int64_t prescan_end = std::min(cap, kPrescanLimit);
  for (std::int64_t n = 2; n <= prescan_end; ++n) {
    if (ok(n)) {
      result.found = true;
      result.n0 = n;
      return result;
    }
  }
  if (cap <= kPrescanLimit) {
    result.lhs_at_cap = sample_size_lhs(in, cap);
    return result;
  }

  // Segment ends: each staircase boundary minus one, then the cap.
  std::vector<std::int64_t> ends;
  for (std::int64_t b : staircase_boundaries(in, cap)) {
    if (b - 1 > kPrescanLimit && b - 1 <= cap) ends.push_back(b - 1);
  }
  ends.push_back(cap);
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());

  std::int64_t lo = kPrescanLimit + 1;
  for (std::int64_t end : ends) {
    if (ok(end)) {
      // Monotone decrease within the segment: binary search the first ok n.
      std::int64_t bad = lo - 1, good = end;
      while (good - bad > 1) {
        const std::int64_t mid = bad + (good - bad) / 2;
        if (ok(mid)) {
          good = mid;
        } else {
          bad = mid;
        }
      }
      // Slide down defensively in case of a flat spot near the crossing.
      while (good > lo && ok(good - 1)) --good;
      result.found = true;
      result.n0 = good;
      return result;
    }
    lo = end + 1;
  }
  result.lhs_at_cap = sample_size_lhs(in, cap);
  return result;
}

double estimation_bound(const BoundInputs& in, bool enforce_hypotheses) {
  check_delta(in.delta);
  const double log4 = std::log(4.0 / in.delta);
  const bool dim_ok = dimension_hypothesis_holds(in.d, in.D, log4);
  const bool d_ok =
      in.d >= 15.0 * std::log(4.0 * static_cast<double>(in.n) / in.delta);
  if (!dim_ok || !d_ok) {
    if (enforce_hypotheses) {
      std::ostringstream msg;
      msg << "estimation_bound hypotheses violated:";
      if (!dim_ok) msg << " D <= d + 2 sqrt(2 d log(4/delta)) + 2 log(4/delta);";
      if (!d_ok) msg << " d < 15 log(4n/delta);";
      throw DomainError(msg.str());
    }
    if (!dim_ok) return std::numeric_limits<double>::quiet_NaN();
  }
  const double m = static_cast<double>(m_n_lambda(in.n, in.lambda, in.gamma));
  const double numerator = 4.0 * in.v_max * in.d * in.L * in.L *
                           xi(in.n, in.d, in.delta / 4.0) *
                           std::sqrt((m + 1.0) * i_fn(in.n - 1, in.delta / 4.0, in.mixing));
  const double denominator = std::sqrt(static_cast<double>(in.n - 1)) *
                             (1.0 - in.gamma) * in.nu_f *
                             eta(in.d, in.D, in.delta / 2.0);
  return numerator / denominator;
}

double approx_coefficient(double gamma, double lambda, bool improved) {
  if (improved) {
    return (1.0 - lambda * gamma) /
           std::sqrt((1.0 - gamma) * (1.0 + gamma - 2.0 * lambda * gamma));
  }
  return (1.0 - lambda * gamma) / (1.0 - gamma);
}

double lstd_rp_approx_coefficient(double gamma) {
  return 4.0 * std::sqrt(2.0) / std::sqrt(1.0 - gamma * gamma);
}

double approximation_bound(const BoundInputs& in, double approx_error_f,
                           bool improved, bool enforce_hypotheses) {
  check_delta(in.delta);
  const double log_term = std::log(8.0 * static_cast<double>(in.n) / in.delta);
  if (in.d < 15.0 * log_term) {
    if (enforce_hypotheses) {
      throw DomainError("approximation_bound hypothesis violated: d < 15 log(8n/delta)");
    }
  }
  const double coeff = approx_coefficient(in.gamma, in.lambda, improved);
  const double ups = upsilon_theorem5(in.n, in.delta / 2.0, in.mixing);
  const double excess = std::sqrt((8.0 / in.d) * log_term) *
                        (1.0 + 2.0 * std::sqrt(ups) / std::sqrt(static_cast<double>(in.n))) *
                        in.m_pi_f_v;
  return coeff * (approx_error_f + excess);
}

BoundReport total_bound(const BoundInputs& in, double approx_error_f,
                        bool enforce_hypotheses, std::int64_t n0_cap) {
  check_delta(in.delta);
  const double log8 = std::log(8.0 / in.delta);
  const double log16n = std::log(16.0 * static_cast<double>(in.n) / in.delta);
  const bool dim_ok = dimension_hypothesis_holds(in.d, in.D, log8);
  const bool d_ok = in.d >= 15.0 * log16n;
  if (enforce_hypotheses && (!dim_ok || !d_ok)) {
    std::ostringstream msg;
    msg << "total_bound hypotheses violated:";
    if (!dim_ok) msg << " D <= d + 2 sqrt(2 d log(8/delta)) + 2 log(8/delta);";
    if (!d_ok) msg << " d < 15 log(16n/delta);";
    throw DomainError(msg.str());
  }

  BoundReport report;
  report.hypotheses_ok = dim_ok && d_ok;
  report.m_n_lambda = m_n_lambda(in.n, in.lambda, in.gamma);
  report.xi = xi(in.n, in.d, in.delta / 8.0);
  report.lambda_val = lambda_fn(in.n - 1, in.delta / 8.0, in.mixing);
  report.i_val = i_fn(in.n - 1, in.delta / 8.0, in.mixing);
  report.upsilon_val = upsilon_theorem5(in.n, in.delta / 4.0, in.mixing);
  report.h_term_omitted = true;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (dim_ok) {
    report.eta = eta(in.d, in.D, in.delta / 4.0);
    const double m = static_cast<double>(report.m_n_lambda);
    report.estimation_bound =
        4.0 * in.v_max * in.d * in.L * in.L * report.xi *
        std::sqrt((m + 1.0) * report.i_val) /
        (std::sqrt(static_cast<double>(in.n - 1)) * (1.0 - in.gamma) * in.nu_f * report.eta);
  } else {
    report.eta = nan;
    report.estimation_bound = nan;
  }
  report.approximation_bound =
      approx_coefficient(in.gamma, in.lambda, false) *
      (approx_error_f +
       std::sqrt((8.0 / in.d) * log16n) *
           (1.0 + (2.0 / std::sqrt(static_cast<double>(in.n))) * std::sqrt(report.upsilon_val)) *
           in.m_pi_f_v);
  report.total_bound = report.estimation_bound + report.approximation_bound;

  try {
    const N0Result res = n0(in, n0_cap);
    if (res.found) report.n0 = res.n0;
  } catch (const DomainError&) {
    // n0's own hypothesis failed; leave the field empty.
  }
  return report;
}

double mixing_hoeffding_radius(std::int64_t n, double delta, double m_h,
                               const MixingParams& mixing) {
  if (n < 1) throw DomainError("mixing_hoeffding_radius requires n >= 1");
  if (m_h < 0.0) throw DomainError("M_h must be nonnegative");
  return (2.0 * m_h / std::sqrt(static_cast<double>(n))) *
         std::sqrt(upsilon_lemma7(n, delta, mixing));
}

}  // namespace projlstd
