// Closed-form rate engine: the user-rate CCDF upper bound and the per-BS
// ergodic sum rate for a PPP deployment with user-centric nulling clusters,
// plus the exhaustive operating-point search built on the sum rate.
#pragma once

#include <vector>

#include "lsmimo/params.hpp"
#include "lsmimo/quadrature.hpp"

namespace lsmimo {

// Frozen inputs for the analytic formulas. Only valid under the analysis
// model (every in-range nulling request granted, residual intra-cluster
// interference dropped); the Monte Carlo engine owns the unabridged model.
struct AnalyticContext {
  SystemParams params;
  OperatingPoint op;
  DerivedParams derived;
  QuadratureSpec quad;
};

AnalyticContext make_context(const SystemParams& sys, const OperatingPoint& op,
                             const QuadratureSpec& quad = QuadratureSpec{});

struct RateCcdfCurve {
  std::vector<double> thresholds_bps_hz; // ascending kappa grid
  std::vector<double> ccdf_upper;        // non-increasing, in [0,1]
};

// Serving-distance CDF 1 - exp(-lambda pi r^2) for the nearest of a PPP.
double f_rmin_cdf(double r, const AnalyticContext& ctx);

// Interference-transform components. Both vanish at s = 0, and
// exp(2 pi lambda (psi_one - psi_two)) is the Laplace transform of the
// aggregate out-of-cluster interference (a value in (0,1], non-increasing
// in s).
double psi_one(double s, const AnalyticContext& ctx);
double psi_two(double s, const AnalyticContext& ctx);
double interference_laplace(double s, const AnalyticContext& ctx);

// Upper bound on P(user rate >= kappa bits/s/Hz), including the scheduling
// fraction w. Requires w <= 1 (K within the candidate pool). Clamped to
// [0,1]; non-increasing in kappa.
double rate_ccdf_upper(double kappa, const AnalyticContext& ctx);

// Bound evaluated on an auto-built grid: `points` thresholds from 0 up to
// the kappa where the bound decays to ~tail_floor.
RateCcdfCurve rate_ccdf_curve(const AnalyticContext& ctx, int points = 30,
                              double tail_floor = 0.005);

// Per-BS ergodic sum rate in bits/s/Hz. The double integral is evaluated in
// natural-log units and divided by ln 2, so it compares directly with the
// simulator's log2-based rates.
double ergodic_sum_rate(const AnalyticContext& ctx);

struct ArgmaxResult {
  OperatingPoint op;
  double sum_rate_bps_hz;
};

// Exhaustive scan of every (K, zeta, O) split of M antennas. Ties break to
// smaller K then smaller O; `workers` only parallelizes evaluation, the
// result is identical for any worker count. Evaluation failures abort with
// the offending triple named.
ArgmaxResult argmax_sum_rate(const SystemParams& params, int antennas,
                             const QuadratureSpec& quad = QuadratureSpec{},
                             int workers = 1);

// All triples with their sum rates, enumeration order (K asc, then O asc);
// the grid behind argmax and the sweep CSVs.
std::vector<ArgmaxResult> sum_rate_grid(const SystemParams& params,
                                        int antennas,
                                        const QuadratureSpec& quad = QuadratureSpec{},
                                        int workers = 1);

} // namespace lsmimo
