// Adaptive Gauss-Kronrod quadrature with the three domain transforms the
// rate engine needs: direct dyadic continuation on [0,inf), the rational
// map t/(1-t), and the Rayleigh-CDF substitution that turns serving-distance
// expectations into finite integrals on [0,1).
#pragma once

#include <functional>

namespace lsmimo {

enum class SemiInfiniteTransform {
  none,         // integrate [0,1], [1,2], [2,4], ... until the tail dies out
  cdf_weighted, // expectation against F(r) = 1 - exp(-rate r^2), u = F(r)
  rational_map, // substitute x = t/(1-t), finite integral on [0,1]
};

struct QuadratureSpec {
  double abs_tol = 1e-9;
  double rel_tol = 1e-7;
  int max_subdivisions = 512;
  SemiInfiniteTransform transform = SemiInfiniteTransform::none;
};

inline QuadratureSpec with_transform(QuadratureSpec spec,
                                     SemiInfiniteTransform t) {
  spec.transform = t;
  return spec;
}

// Adaptive 15-point Gauss-Kronrod on [a, b]. Splits the segment with the
// largest error estimate until the total satisfies
// max(abs_tol, rel_tol * |result|). Throws numerical_error with the achieved
// estimate when max_subdivisions is exhausted, and on non-finite integrand
// values.
double integrate_interval(const std::function<double(double)>& f, double a,
                          double b, const QuadratureSpec& spec);

// Integral of f over [0, inf) under spec.transform. For cdf_weighted the
// integral computed is the expectation of f(r) with r Rayleigh-distributed,
// F(r) = 1 - exp(-rayleigh_rate * r^2), truncated at F = 1 - 1e-10;
// rayleigh_rate must be positive in that mode and is ignored otherwise.
double integrate_semi_infinite(const std::function<double(double)>& f,
                               const QuadratureSpec& spec,
                               double rayleigh_rate = 0.0);

} // namespace lsmimo
