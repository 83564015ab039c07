// Scalar special functions backing the analytic rate engine: the Gauss
// hypergeometric function on the negative real axis, integer-shape Gamma
// tail probabilities, and Gamma sampling.
#pragma once

#include <cstdint>

#include "lsmimo/rng.hpp"

namespace lsmimo {

// Gauss hypergeometric 2F1(a, b; c; z) for z <= 0.
//
// Evaluation: Pfaff transformation z -> z/(z-1) in [0,1) with the defining
// series (relative tolerance 1e-12, 500-term cap) while |z| <= 16; beyond
// that the series needs more than the term cap, so the standard z -> 1/z
// connection formula takes over. Call sites use a = K >= 1, b in (-1,0),
// c = 1 + b; the connection branch requires c - b and a - b non-integral,
// which that pattern guarantees for every pathloss exponent > 2.
//
// Throws numerical_error (carrying a,b,c,z) if the series fails to converge
// and std::invalid_argument for z > 0 or c a non-positive integer.
double hyp2f1(double a, double b, double c, double z);

// 2F1(a, b; c; z) - 1 evaluated without cancellation; same domain as
// hyp2f1. The Psi brackets (1 - 2F1) need this directly because near s = 0
// the function is 1 + O(s) and forming the bracket by subtraction would
// lose all significant digits.
double hyp2f1m1(double a, double b, double c, double z);

// P(X >= x) for X ~ Gamma(shape, 1) with integer shape >= 1: the finite
// Poisson sum e^{-x} sum_{i<shape} x^i/i!. Exact monotone evaluation; for
// x > 700 the sum is carried in log space to dodge e^{-x} underflow.
double gamma_ccdf(int shape, double x);

// One Gamma(shape, 1) draw as a sum of `shape` unit exponentials.
double sample_gamma(int shape, Rng& rng);

} // namespace lsmimo
