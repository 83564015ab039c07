#include "lsmimo/analytic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>
#include <vector>

#include "lsmimo/errors.hpp"
#include "lsmimo/specfun.hpp"

namespace lsmimo {

namespace {

constexpr double kLn2 = 0.6931471805599453094;
// exp(-s) underflows to 0 below -745.13; terms beyond contribute nothing.
constexpr double kExpUnderflow = 745.0;

// Shared pieces of the psi transforms at distance ratio u_c = 1 + R_c/d0.
struct PsiArgs {
  double u_c;     // cluster edge in units of d0, offset by 1
  double z;       // hypergeometric argument -s*rho*u_c^(-alpha), z <= 0
  double d0_sq;   // reference_distance^2
};

PsiArgs psi_args(double s, const AnalyticContext& ctx) {
  if (!(s >= 0.0)) {
    throw std::invalid_argument("interference transform: s must be >= 0, got " +
                                std::to_string(s));
  }
  const double d0 = ctx.params.reference_distance_m;
  const double u_c = 1.0 + ctx.derived.cluster_radius_m / d0;
  const double z =
      -s * ctx.derived.per_user_snr * std::pow(u_c, -ctx.params.pathloss_exponent);
  return {u_c, z, d0 * d0};
}

} // namespace

AnalyticContext make_context(const SystemParams& sys, const OperatingPoint& op,
                             const QuadratureSpec& quad) {
  validate(sys);
  validate(op, sys);
  return AnalyticContext{sys, op, derive(sys, op), quad};
}

double f_rmin_cdf(double r, const AnalyticContext& ctx) {
  if (r < 0.0) return 0.0;
  // Nearest point of a PPP: P(r_min <= r) = 1 - exp(-lambda*pi*r^2).
  return -std::expm1(-ctx.params.bs_density * M_PI * r * r);
}

// psi_one(s) = (d0^2/2) u_c^2 [1 - 2F1(K, -2/a; 1-2/a; z)]. The bracket is
// computed as -(F-1) so values stay accurate when F is within rounding of 1.
double psi_one(double s, const AnalyticContext& ctx) {
  const PsiArgs p = psi_args(s, ctx);
  const double a = ctx.params.pathloss_exponent;
  const double fm1 = hyp2f1m1(static_cast<double>(ctx.op.multiplexing),
                              -2.0 / a, 1.0 - 2.0 / a, p.z);
  return -0.5 * p.d0_sq * p.u_c * p.u_c * fm1;
}

// psi_two(s) = d0^2 u_c [1 - 2F1(K, -1/a; 1-1/a; z)].
double psi_two(double s, const AnalyticContext& ctx) {
  const PsiArgs p = psi_args(s, ctx);
  const double a = ctx.params.pathloss_exponent;
  const double fm1 = hyp2f1m1(static_cast<double>(ctx.op.multiplexing),
                              -1.0 / a, 1.0 - 1.0 / a, p.z);
  return -p.d0_sq * p.u_c * fm1;
}

double interference_laplace(double s, const AnalyticContext& ctx) {
  // E[exp(-s * normalized out-of-cluster interference)] via the PPP
  // generating functional; psi_one - psi_two <= 0 so the result is in (0,1].
  const double expo = 2.0 * M_PI * ctx.params.bs_density *
                      (psi_one(s, ctx) - psi_two(s, ctx));
  const double value = std::exp(expo);
  if (!std::isfinite(value)) {
    throw numerical_error("interference_laplace: non-finite at s=" +
                          std::to_string(s));
  }
  return value;
}

double rate_ccdf_upper(double kappa, const AnalyticContext& ctx) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("rate_ccdf_upper: kappa must be finite and >= 0");
  }
  const double w = ctx.derived.schedule_fraction;
  if (!(w > 0.0) || w > 1.0) {
    throw std::invalid_argument(
        "rate_ccdf_upper: schedule fraction K/users_per_cell must be in (0,1]; "
        "multiplexing exceeds the per-cell user pool");
  }
  // Rates are nonnegative, so the zero-threshold event is certain; skip the
  // quadrature, whose truncation would land a hair under 1.
  if (kappa == 0.0) return 1.0;
  const int zeta = ctx.op.diversity;
  const double alpha = ctx.params.pathloss_exponent;
  const double d0 = ctx.params.reference_distance_m;
  const double tau = db_to_linear(ctx.params.snr_gap_db);
  const double rho = ctx.derived.per_user_snr;
  // Moment-bound constant (zeta!)^(-1/zeta), exact for zeta = 1.
  const double mu = std::exp(-std::lgamma(zeta + 1.0) / zeta);
  // SINR threshold implied by rate kappa over a 1/w time share.
  const double gain = std::expm1(kappa / w * kLn2);
  if (!std::isfinite(gain)) return 0.0; // threshold beyond any finite SINR
  const double base = mu * tau / rho * gain;

  // Binomial coefficients C(zeta, j), exact in double for zeta <= 49.
  std::vector<double> binom(static_cast<size_t>(zeta) + 1, 0.0);
  binom[1] = static_cast<double>(zeta);
  for (int j = 2; j <= zeta; ++j) {
    binom[j] = binom[j - 1] * (zeta - j + 1) / j;
  }

  auto integrand = [&](double r) -> double {
    const double growth = std::pow(1.0 + r / d0, alpha);
    const double a1 = base * growth; // s at j = 1
    if (!std::isfinite(a1)) return 0.0;
    auto term = [&](int j) -> double {
      const double s = a1 * j;
      if (s > kExpUnderflow) return 0.0; // exp(-s) = 0, laplace <= 1
      return binom[j] * std::exp(-s) * interference_laplace(s, ctx);
    };
    // Alternating sum over j: adjacent terms nearly cancel for large zeta,
    // so difference consecutive pairs first, then compensated-add the pairs.
    double sum = 0.0;
    double carry = 0.0;
    auto kahan_add = [&](double v) {
      const double y = v - carry;
      const double t = sum + y;
      carry = (t - sum) - y;
      sum = t;
    };
    for (int j = 1; j + 1 <= zeta; j += 2) {
      kahan_add(term(j) - term(j + 1));
    }
    if (zeta % 2 == 1) kahan_add(term(zeta));
    return sum;
  };

  const double rate = ctx.params.bs_density * M_PI;
  const double value =
      integrate_semi_infinite(integrand, with_transform(ctx.quad, SemiInfiniteTransform::cdf_weighted), rate);
  return std::clamp(value, 0.0, 1.0);
}

RateCcdfCurve rate_ccdf_curve(const AnalyticContext& ctx, int points,
                              double tail_floor) {
  if (points < 2) {
    throw std::invalid_argument("rate_ccdf_curve: need at least 2 points");
  }
  if (!(tail_floor > 0.0) || tail_floor >= 1.0) {
    throw std::invalid_argument("rate_ccdf_curve: tail_floor must be in (0,1)");
  }
  // Bracket the threshold where the bound decays to tail_floor, then bisect.
  double hi = 1.0;
  while (rate_ccdf_upper(hi, ctx) > tail_floor && hi < 1e6) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (rate_ccdf_upper(mid, ctx) > tail_floor) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  RateCcdfCurve curve;
  curve.thresholds_bps_hz.resize(points);
  curve.ccdf_upper.resize(points);
  for (int i = 0; i < points; ++i) {
    const double kappa = hi * i / (points - 1);
    curve.thresholds_bps_hz[i] = kappa;
    double v = rate_ccdf_upper(kappa, ctx);
    // The bound is non-increasing; quadrature noise (<= tolerance) may leave
    // hair-width inversions between neighbors, so clamp to the running min.
    if (i > 0) v = std::min(v, curve.ccdf_upper[i - 1]);
    curve.ccdf_upper[i] = v;
  }
  return curve;
}

double ergodic_sum_rate(const AnalyticContext& ctx) {
  const int kk = ctx.op.multiplexing;
  const int zeta = ctx.op.diversity;
  const double alpha = ctx.params.pathloss_exponent;
  const double d0 = ctx.params.reference_distance_m;
  const double tau = db_to_linear(ctx.params.snr_gap_db);
  const double rho = ctx.derived.per_user_snr;
  const double rayleigh_rate = ctx.params.bs_density * M_PI;

  // Inner expectation over the serving distance, at fixed z:
  //   E_r[1 - (1 + z*rho*beta(r))^(-zeta)]
  // expm1/log1p keep it accurate when z*rho*beta is tiny.
  QuadratureSpec inner_quad = ctx.quad;
  inner_quad.abs_tol = ctx.quad.abs_tol * 0.1;
  inner_quad.rel_tol = ctx.quad.rel_tol * 0.1;
  auto signal_term = [&](double z) -> double {
    auto f = [&](double r) -> double {
      const double snr = z * rho * std::pow(1.0 + r / d0, -alpha);
      return -std::expm1(-zeta * std::log1p(snr));
    };
    return integrate_semi_infinite(
        f, with_transform(inner_quad, SemiInfiniteTransform::cdf_weighted),
        rayleigh_rate);
  };

  auto outer = [&](double z) -> double {
    const double zt = z * tau;
    if (zt > kExpUnderflow) return 0.0; // exp(-z*tau) underflows
    const double damp = std::exp(-zt) * interference_laplace(zt, ctx);
    if (damp <= 0.0) return 0.0;
    return damp / z * signal_term(z);
  };

  const double nats = integrate_semi_infinite(
      outer, with_transform(ctx.quad, SemiInfiniteTransform::rational_map));
  const double value = kk * nats / kLn2;
  if (!std::isfinite(value) || value < 0.0) {
    throw numerical_error("ergodic_sum_rate: integral evaluated to " +
                          std::to_string(value));
  }
  return value;
}

std::vector<ArgmaxResult> sum_rate_grid(const SystemParams& params,
                                        int antennas,
                                        const QuadratureSpec& quad,
                                        int workers) {
  validate(params);
  const std::vector<OperatingPoint> ops = enumerate_operating_points(antennas);
  std::vector<ArgmaxResult> slots(ops.size());
  std::vector<std::exception_ptr> errors(ops.size());

  auto evaluate = [&](size_t i) {
    try {
      const AnalyticContext ctx = make_context(params, ops[i], quad);
      slots[i] = {ops[i], ergodic_sum_rate(ctx)};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  int n_workers = std::clamp(workers, 1,
                             static_cast<int>(std::min<size_t>(ops.size(), 64)));
  if (n_workers <= 1) {
    for (size_t i = 0; i < ops.size(); ++i) evaluate(i);
  } else {
    // Work-stealing over a shared counter; slot array keeps results in
    // enumeration order no matter which thread finishes when.
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) {
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < ops.size();
             i = next.fetch_add(1)) {
          evaluate(i);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  for (size_t i = 0; i < ops.size(); ++i) {
    if (errors[i]) {
      std::ostringstream msg;
      msg << "sum-rate evaluation failed at (K=" << ops[i].multiplexing
          << ", zeta=" << ops[i].diversity << ", O=" << ops[i].nulling << "): ";
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        throw numerical_error(msg.str() + e.what());
      }
    }
  }
  return slots;
}

ArgmaxResult argmax_sum_rate(const SystemParams& params, int antennas,
                             const QuadratureSpec& quad, int workers) {
  const std::vector<ArgmaxResult> grid =
      sum_rate_grid(params, antennas, quad, workers);
  // Strict > over the (K asc, O asc) enumeration implements the tie-break:
  // smaller K wins, then smaller O.
  size_t best = 0;
  for (size_t i = 1; i < grid.size(); ++i) {
    if (grid[i].sum_rate_bps_hz > grid[best].sum_rate_bps_hz) best = i;
  }
  return grid[best];
}

} // namespace lsmimo
