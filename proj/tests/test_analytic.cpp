// Analytic rate engine: interference transforms and the rate-CCDF bound
// against 40-digit references, the ergodic sum rate against an independent
// prototype, structural properties (monotonicity, bounds), and the
// operating-point search.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsmimo/analytic.hpp"
#include "lsmimo/errors.hpp"
#include "oracles.hpp"

using namespace lsmimo;
using lsmimo::testing::rel_diff;

namespace {

// Four-fold clustering (B-bar = 4) at K = 3 on the baseline deployment: the
// configuration behind the frozen transform references.
AnalyticContext cluster4_ctx(int users_per_cell = 15) {
  SystemParams sys;
  sys.users_per_cell = users_per_cell;
  return make_context(sys, OperatingPoint{15, 3, 4, 9});
}

} // namespace

TEST_CASE("serving-distance CDF") {
  const AnalyticContext ctx = cluster4_ctx();
  CHECK(f_rmin_cdf(0.0, ctx) == 0.0);
  CHECK(f_rmin_cdf(-5.0, ctx) == 0.0);
  // Median at sqrt(ln 2 / (lambda pi)) = 500 sqrt(ln 2).
  CHECK(rel_diff(f_rmin_cdf(416.27730557884888, ctx), 0.5) < 1e-14);
  CHECK(f_rmin_cdf(1e9, ctx) == 1.0);
  // Monotone in r.
  CHECK(f_rmin_cdf(300.0, ctx) < f_rmin_cdf(400.0, ctx));
}

TEST_CASE("interference transforms match 40-digit references") {
  const AnalyticContext ctx = cluster4_ctx();
  CHECK(rel_diff(psi_one(1.0, ctx), -1618159.0786701298) < 1e-10);
  CHECK(rel_diff(psi_two(1.0, ctx), -331.7631617291964) < 1e-10);
  CHECK(rel_diff(interference_laplace(1.0, ctx), 2.3938238721457509e-6) < 1e-8);
}

TEST_CASE("interference transforms: limits and monotonicity") {
  const AnalyticContext ctx = cluster4_ctx();
  CHECK(psi_one(0.0, ctx) == 0.0);
  CHECK(psi_two(0.0, ctx) == 0.0);
  CHECK(interference_laplace(0.0, ctx) == 1.0);
  double prev = 1.0;
  for (double t = -3.0; t <= 3.0; t += 0.25) {
    const double l = interference_laplace(std::pow(10.0, t), ctx);
    CHECK(l > 0.0);
    CHECK(l <= prev); // Laplace transform of a positive variable
    prev = l;
  }
  CHECK_THROWS_AS(psi_one(-1.0, ctx), std::invalid_argument);
}

TEST_CASE("rate CCDF bound matches the frozen curve points") {
  // Scheduling pool of 21 makes the time share w = 3/21 = 1/7.
  const AnalyticContext ctx = cluster4_ctx(21);
  CHECK(rel_diff(rate_ccdf_upper(0.25, ctx), 0.596342357376) < 1e-6);
  CHECK(rel_diff(rate_ccdf_upper(0.5, ctx), 0.34684673864) < 1e-6);
  CHECK(rel_diff(rate_ccdf_upper(1.0, ctx), 0.107625253369) < 1e-6);
}

TEST_CASE("rate CCDF bound: endpoints and shape") {
  const AnalyticContext ctx = cluster4_ctx(21);
  CHECK(rate_ccdf_upper(0.0, ctx) >= 1.0 - 1e-7);
  CHECK(rate_ccdf_upper(0.0, ctx) <= 1.0);
  CHECK(rate_ccdf_upper(400.0, ctx) == 0.0); // SINR threshold overflows
  double prev = 1.0;
  for (double kappa = 0.0; kappa <= 3.0; kappa += 0.125) {
    const double p = rate_ccdf_upper(kappa, ctx);
    CHECK(p >= 0.0);
    CHECK(p <= prev + 1e-9);
    prev = p;
  }
  CHECK_THROWS_AS(rate_ccdf_upper(-0.5, ctx), std::invalid_argument);
}

TEST_CASE("rate CCDF bound requires a feasible time share") {
  // K = 16 exceeds the 15-user pool: w > 1 has no scheduling meaning.
  SystemParams sys;
  const AnalyticContext ctx = make_context(sys, OperatingPoint{16, 16, 1, 0});
  CHECK_THROWS_AS(rate_ccdf_upper(0.5, ctx), std::invalid_argument);
}

TEST_CASE("single-order diversity reduces to the exact exponential form") {
  // At zeta = 1 the moment constant is 1 and the bound collapses to the
  // exact CCDF of an exponential-fading user; cross-check against a direct
  // trapezoid evaluation written independently of the quadrature stack.
  SystemParams sys;
  sys.users_per_cell = 21;
  const AnalyticContext ctx = make_context(sys, OperatingPoint{15, 3, 1, 12});
  const double alpha = sys.pathloss_exponent;
  const double d0 = sys.reference_distance_m;
  const double rho = ctx.derived.per_user_snr;
  const double tau = db_to_linear(sys.snr_gap_db);
  const double w = ctx.derived.schedule_fraction;
  const double lam_pi = sys.bs_density * M_PI;
  for (double kappa : {0.1, 0.5, 1.0}) {
    const double gain = std::pow(2.0, kappa / w) - 1.0;
    double acc = 0.0;
    const int n = 60000;
    const double rmax = 4000.0;
    for (int i = 0; i <= n; ++i) {
      const double r = rmax * i / n;
      const double s = tau / rho * gain * std::pow(1.0 + r / d0, alpha);
      const double pdf = 2.0 * lam_pi * r * std::exp(-lam_pi * r * r);
      const double v = std::exp(-s) * interference_laplace(s, ctx) * pdf;
      acc += (i == 0 || i == n) ? 0.5 * v : v;
    }
    acc *= rmax / n;
    CHECK(rel_diff(rate_ccdf_upper(kappa, ctx), acc) < 1e-5);
  }
}

TEST_CASE("auto-built CCDF curve is well formed") {
  const AnalyticContext ctx = cluster4_ctx(21);
  const RateCcdfCurve curve = rate_ccdf_curve(ctx, 30, 0.005);
  REQUIRE(curve.thresholds_bps_hz.size() == 30);
  REQUIRE(curve.ccdf_upper.size() == 30);
  CHECK(curve.thresholds_bps_hz.front() == 0.0);
  for (size_t i = 1; i < 30; ++i) {
    CHECK(curve.thresholds_bps_hz[i] > curve.thresholds_bps_hz[i - 1]);
    CHECK(curve.ccdf_upper[i] <= curve.ccdf_upper[i - 1]);
  }
  CHECK(curve.ccdf_upper.front() >= 1.0 - 1e-7);
  // The grid is built to end where the bound decays to the tail floor.
  CHECK(curve.ccdf_upper.back() <= 0.0055);
  CHECK(curve.ccdf_upper.back() >= 0.002);
}

TEST_CASE("ergodic sum rate matches the independent prototype") {
  const SystemParams sys;
  // Values frozen from an arbitrary-precision prototype (25 digits working
  // precision, tanh-sinh quadrature), trusted to ~1e-10 relative.
  CHECK(rel_diff(ergodic_sum_rate(make_context(sys, {15, 10, 6, 0})),
                 16.053375959054) < 1e-7);
  CHECK(rel_diff(ergodic_sum_rate(make_context(sys, {15, 9, 7, 0})),
                 16.0504858125) < 1e-7);
  CHECK(rel_diff(ergodic_sum_rate(make_context(sys, {15, 8, 6, 2})),
                 14.8876674161) < 1e-7);
  CHECK(rel_diff(ergodic_sum_rate(make_context(sys, {10, 6, 5, 0})),
                 10.928504419131) < 1e-7);
}

TEST_CASE("sum rate decreases when nulling crowds out diversity") {
  const SystemParams sys;
  double prev = 1e9;
  for (int o = 0; o <= 5; ++o) {
    // M = 15, K = 10: every nulling dimension comes out of diversity.
    const double r = ergodic_sum_rate(make_context(sys, {15, 10, 6 - o, o}));
    CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("operating-point search finds the frozen optima") {
  const SystemParams sys;
  const ArgmaxResult ten = argmax_sum_rate(sys, 10);
  CHECK(ten.op.multiplexing == 6);
  CHECK(ten.op.diversity == 5);
  CHECK(ten.op.nulling == 0);
  CHECK(rel_diff(ten.sum_rate_bps_hz, 10.928504419131) < 1e-7);

  const ArgmaxResult fifteen = argmax_sum_rate(sys, 15, QuadratureSpec{}, 4);
  CHECK(fifteen.op.multiplexing == 10);
  CHECK(fifteen.op.diversity == 6);
  CHECK(fifteen.op.nulling == 0);
}

TEST_CASE("search results are worker-count invariant") {
  const SystemParams sys;
  const auto serial = sum_rate_grid(sys, 6, QuadratureSpec{}, 1);
  const auto parallel = sum_rate_grid(sys, 6, QuadratureSpec{}, 8);
  REQUIRE(serial.size() == parallel.size());
  REQUIRE(serial.size() == 21);
  for (size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].op.multiplexing == parallel[i].op.multiplexing);
    CHECK(serial[i].op.nulling == parallel[i].op.nulling);
    CHECK(serial[i].sum_rate_bps_hz == parallel[i].sum_rate_bps_hz); // bit-exact
  }
}

TEST_CASE("search failures name the offending triple") {
  const SystemParams sys;
  QuadratureSpec starved;
  starved.abs_tol = 1e-300;
  starved.rel_tol = 1e-15;
  starved.max_subdivisions = 2;
  try {
    argmax_sum_rate(sys, 3, starved);
    FAIL("expected numerical_error");
  } catch (const numerical_error& e) {
    CHECK(std::string(e.what()).find("K=") != std::string::npos);
  }
}
