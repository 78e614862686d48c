#pragma once

#include <cmath>
#include <vector>

#include "expfit/mpnum/complex.hpp"
#include "expfit/mpnum/matrix.hpp"

namespace expfit {

// Polynomial with ascending coefficients c[0] + c[1] z + ... .
struct Poly {
  RealVec coeffs;

  std::size_t degree() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
  prec_t prec() const { return max_prec(coeffs); }

  // Drops trailing zero coefficients.
  Poly& normalize() {
    while (coeffs.size() > 1 && coeffs.back().is_zero()) coeffs.pop_back();
    return *this;
  }
  Poly monic() const {
    Poly q = *this;
    q.normalize();
    Real lead = q.coeffs.back();
    for (auto& c : q.coeffs) c /= lead;
    return q;
  }

  Real operator()(const Real& z) const {
    Real acc(std::max(prec(), z.prec()));
    for (std::size_t i = coeffs.size(); i-- > 0;) {
      acc *= z;
      acc += coeffs[i];
    }
    return acc;
  }
  Complex operator()(const Complex& z) const {
    Complex acc(std::max(prec(), z.prec()));
    for (std::size_t i = coeffs.size(); i-- > 0;) {
      acc = acc * z;
      acc.re += coeffs[i];
    }
    return acc;
  }
  Poly derivative() const {
    Poly d;
    for (std::size_t i = 1; i < coeffs.size(); ++i) d.coeffs.push_back(coeffs[i] * static_cast<long>(i));
    if (d.coeffs.empty()) d.coeffs.push_back(Real(prec()));
    return d;
  }
};

// Monic polynomial prod (z - r_i).
inline Poly poly_from_roots(const RealVec& roots, prec_t prec) {
  Poly p;
  p.coeffs.push_back(Real(1L, prec));
  for (const auto& r : roots) {
    p.coeffs.push_back(p.coeffs.back());
    for (std::size_t i = p.coeffs.size() - 2; i > 0; --i) p.coeffs[i] = p.coeffs[i - 1] - r * p.coeffs[i];
    p.coeffs[0] = -(r * p.coeffs[0]);
  }
  return p;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
  Poly c;
  if (a.coeffs.empty() || b.coeffs.empty()) return c;
  c.coeffs = zeros(a.coeffs.size() + b.coeffs.size() - 1, std::max(a.prec(), b.prec()));
  for (std::size_t i = 0; i < a.coeffs.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs.size(); ++j) c.coeffs[i + j].add_mul(a.coeffs[i], b.coeffs[j]);
  return c;
}

namespace detail {

// Upper convex hull of (i, log|c_i|); returns hull vertex indices.
inline std::vector<std::size_t> newton_polygon(const std::vector<double>& logc) {
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < logc.size(); ++i) {
    if (!std::isfinite(logc[i])) continue;
    while (hull.size() >= 2) {
      std::size_t a = hull[hull.size() - 2], b = hull.back();
      double cross = (static_cast<double>(b) - a) * (logc[i] - logc[a]) - (logc[b] - logc[a]) * (static_cast<double>(i) - a);
      if (cross >= 0) hull.pop_back();
      else break;
    }
    hull.push_back(i);
  }
  return hull;
}

}  // namespace detail

struct RootsResult {
  ComplexVec roots;
  int iterations = 0;
};

// Aberth-Ehrlich simultaneous iteration. Starting points lie on the circles
// of the Newton polygon of |c_i|, one circle per hull edge, which resolves
// root sets spread over many orders of magnitude. A root is frozen once its
// step is below 2^(-prec/2) relative to its modulus.
inline RootsResult poly_roots_detailed(const Poly& p_in) {
  Poly p = p_in;
  p.normalize();
  const std::size_t deg = p.degree();
  if (deg < 1) fail(Errc::InvalidArgument, "poly_roots: degree must be >= 1");
  const prec_t prec = p.prec();
  RootsResult out;
  // Zero roots factor out exactly.
  std::size_t zeros_at_origin = 0;
  while (zeros_at_origin < deg && p.coeffs[zeros_at_origin].is_zero()) ++zeros_at_origin;
  Poly q;
  q.coeffs.assign(p.coeffs.begin() + static_cast<long>(zeros_at_origin), p.coeffs.end());
  q = q.monic();
  const std::size_t d = q.degree();
  for (std::size_t i = 0; i < zeros_at_origin; ++i) out.roots.emplace_back(prec);
  if (d == 0) return out;

  std::vector<double> logc(d + 1);
  for (std::size_t i = 0; i <= d; ++i) logc[i] = q.coeffs[i].log_abs();
  std::vector<std::size_t> hull = detail::newton_polygon(logc);
  ComplexVec z;
  const double two_pi = 2.0 * M_PI;
  for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
    std::size_t k0 = hull[h], k1 = hull[h + 1];
    std::size_t m = k1 - k0;
    double logr = (logc[k0] - logc[k1]) / static_cast<double>(m);
    Real r = exp(Real(logr, prec));
    for (std::size_t j = 0; j < m; ++j) {
      double ang = two_pi * static_cast<double>(j) / static_cast<double>(m) + two_pi * static_cast<double>(h) / static_cast<double>(d) + 0.4;
      z.emplace_back(r * Real(std::cos(ang), prec), r * Real(std::sin(ang), prec));
    }
  }

  Poly dq = q.derivative();
  std::vector<bool> done(d, false);
  const Real steptol = ldexp(Real(1L, prec), -static_cast<long>(prec / 2));
  const int cap = static_cast<int>(200 * deg);
  int it = 0;
  std::size_t remaining = d;
  for (; it < cap && remaining > 0; ++it) {
    for (std::size_t i = 0; i < d; ++i) {
      if (done[i]) continue;
      Complex pv = q(z[i]);
      if (pv.re.is_zero() && pv.im.is_zero()) {
        done[i] = true;
        --remaining;
        continue;
      }
      Complex ratio = pv / dq(z[i]);
      Complex sum(prec);
      for (std::size_t j = 0; j < d; ++j) {
        if (j == i) continue;
        sum += inverse(z[i] - z[j]);
      }
      Complex denom = Complex(Real(1L, prec), Real(prec)) - ratio * sum;
      Complex step = ratio / denom;
      z[i] -= step;
      if (abs(step) <= steptol * abs(z[i])) {
        done[i] = true;
        --remaining;
      }
    }
  }
  if (remaining > 0) fail(Errc::NoConvergence, "poly_roots: iteration cap reached");
  out.iterations = it;
  for (auto& r : z) out.roots.push_back(std::move(r));
  return out;
}

inline ComplexVec poly_roots(const Poly& p) { return poly_roots_detailed(p).roots; }

}  // namespace expfit
