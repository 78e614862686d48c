#pragma once

#include <gtest/gtest.h>

#include <random>
#include <string>

#include "expfit/mpnum.hpp"

namespace expfit::testing {

// log10 of |a-b|/|b| (or |a-b| when b == 0); -inf when equal.
inline double log10_gap(const Real& a, const Real& b) {
  Real g = rel_err(a, b);
  return g.is_zero() ? -1e300 : g.log_abs() / std::log(10.0);
}

inline ::testing::AssertionResult rel_close(const Real& a, const Real& b, double log10_tol) {
  double g = log10_gap(a, b);
  if (g <= log10_tol) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << a.to_string(30) << " vs " << b.to_string(30) << ": log10 gap " << g
                                       << " > " << log10_tol;
}

inline ::testing::AssertionResult abs_close(const Real& a, const Real& b, double log10_tol) {
  Real d = abs(a - b);
  double g = d.is_zero() ? -1e300 : d.log_abs() / std::log(10.0);
  if (g <= log10_tol) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << a.to_string(30) << " vs " << b.to_string(30) << ": log10 |diff| " << g
                                       << " > " << log10_tol;
}

// log10 of 2^(-bits).
inline double log10_pow2(double bits) { return -bits * 0.30102999566398120; }

inline Real uniform(std::mt19937_64& rng, double lo, double hi, prec_t p) {
  std::uniform_real_distribution<double> d(lo, hi);
  // Widen the double with a second draw so low bits are not all zero.
  Real x(d(rng), p);
  x += Real(std::uniform_real_distribution<double>(0, 1)(rng), p) * Real(1e-17 * (hi - lo), p);
  return x;
}

}  // namespace expfit::testing
