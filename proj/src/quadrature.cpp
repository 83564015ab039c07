#include "lsmimo/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "lsmimo/errors.hpp"

namespace lsmimo {

namespace {

// 15-point Kronrod extension of 7-point Gauss on [-1,1] (QUADPACK dqk15).
constexpr double kNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kWeightsKronrod[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
// Gauss-7 weights sit on the odd-indexed Kronrod nodes.
constexpr double kWeightsGauss[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
};

bool operator<(const Segment& x, const Segment& y) { return x.error < y.error; }

// One GK15 pass over [a,b]: Kronrod value, and the QUADPACK error model
// built from the Gauss-Kronrod discrepancy and the integrand's variation.
Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(mid - half * kNodes[i]);
    fv[14 - i] = f(mid + half * kNodes[i]);
  }
  fv[7] = f(mid);
  double resk = 0.0;
  double resg = 0.0;
  double resabs = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double pair = (i == 7) ? fv[7] : fv[i] + fv[14 - i];
    resk += kWeightsKronrod[i] * pair;
    resabs += kWeightsKronrod[i] * ((i == 7) ? std::abs(fv[7])
                                             : std::abs(fv[i]) + std::abs(fv[14 - i]));
    if (i % 2 == 1 || i == 7) {
      resg += kWeightsGauss[i / 2] * pair; // Gauss nodes: indices 1,3,5,7
    }
  }
  const double mean = 0.5 * resk;
  double resasc = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double dev = (i == 7) ? std::abs(fv[7] - mean)
                                : std::abs(fv[i] - mean) + std::abs(fv[14 - i] - mean);
    resasc += kWeightsKronrod[i] * dev;
  }
  resasc *= half;
  const double value = resk * half;
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "quadrature: non-finite integrand on [" << a << ", " << b << "]";
    throw numerical_error(msg.str());
  }
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  const double round_floor = 50.0 * 2.220446049250313e-16 * resabs * half;
  return Segment{a, b, value, std::max(err, round_floor)};
}

} // namespace

double integrate_interval(const std::function<double(double)>& f, double a,
                          double b, const QuadratureSpec& spec) {
  if (!(a <= b)) {
    throw std::invalid_argument("integrate_interval: requires a <= b");
  }
  if (spec.max_subdivisions < 1) {
    throw std::invalid_argument("integrate_interval: max_subdivisions must be >= 1");
  }
  if (a == b) {
    return 0.0;
  }
  std::priority_queue<Segment> queue;
  queue.push(gk15(f, a, b));
  double total_value = queue.top().value;
  double total_error = queue.top().error;
  int splits = 0;
  while (total_error > std::max(spec.abs_tol, spec.rel_tol * std::abs(total_value))) {
    if (splits >= spec.max_subdivisions) {
      std::ostringstream msg;
      msg << "quadrature: tolerance not reached after " << splits
          << " subdivisions; achieved error estimate " << total_error
          << " for value " << total_value;
      throw numerical_error(msg.str());
    }
    Segment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Interval at floating-point resolution: accept its estimate as is.
      queue.push(Segment{worst.a, worst.b, worst.value, 0.0});
      total_error -= worst.error;
      continue;
    }
    const Segment left = gk15(f, worst.a, mid);
    const Segment right = gk15(f, mid, worst.b);
    total_value += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++splits;
  }
  // Re-sum in interval order: the result is then independent of the split
  // history's queue ordering.
  std::vector<Segment> segs;
  segs.reserve(queue.size());
  while (!queue.empty()) {
    segs.push_back(queue.top());
    queue.pop();
  }
  std::sort(segs.begin(), segs.end(),
            [](const Segment& x, const Segment& y) { return x.a < y.a; });
  double result = 0.0;
  for (const Segment& s : segs) {
    result += s.value;
  }
  return result;
}

double integrate_semi_infinite(const std::function<double(double)>& f,
                               const QuadratureSpec& spec,
                               double rayleigh_rate) {
  switch (spec.transform) {
    case SemiInfiniteTransform::none: {
      // Dyadic continuation; stop once two consecutive blocks are negligible
      // against the accumulated value.
      QuadratureSpec block = spec;
      block.abs_tol = spec.abs_tol / 8.0;
      double acc = integrate_interval(f, 0.0, 1.0, block);
      double lo = 1.0;
      int quiet = 0;
      while (quiet < 2) {
        const double hi = 2.0 * lo;
        const double piece = integrate_interval(f, lo, hi, block);
        acc += piece;
        const double cutoff =
            0.25 * std::max(spec.abs_tol, spec.rel_tol * std::abs(acc));
        quiet = (std::abs(piece) <= cutoff) ? quiet + 1 : 0;
        lo = hi;
        if (lo > 0x1p60) {
          throw numerical_error(
              "integrate_semi_infinite: integrand tail did not decay by 2^60");
        }
      }
      return acc;
    }
    case SemiInfiniteTransform::rational_map: {
      // x = t/(1-t): nodes never touch t = 1, and any overflow to x = inf
      // would surface as a non-finite integrand error in gk15.
      auto g = [&f](double t) {
        const double om = 1.0 - t;
        const double x = t / om;
        return f(x) / (om * om);
      };
      return integrate_interval(g, 0.0, 1.0, spec);
    }
    case SemiInfiniteTransform::cdf_weighted: {
      if (!(rayleigh_rate > 0.0)) {
        throw std::invalid_argument(
            "integrate_semi_infinite: cdf_weighted requires rayleigh_rate > 0");
      }
      // u = F(r) maps the expectation to [0,1); truncate at F = 1 - 1e-10,
      // which discards that much probability mass from the far tail.
      auto g = [&f, rayleigh_rate](double u) {
        const double r = std::sqrt(-std::log1p(-u) / rayleigh_rate);
        return f(r);
      };
      return integrate_interval(g, 0.0, 1.0 - 1e-10, spec);
    }
  }
  throw std::invalid_argument("integrate_semi_infinite: unknown transform");
}

} // namespace lsmimo
