#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "expfit/mpnum/matrix.hpp"

namespace expfit {

// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  RealVec x, w;
};

inline GaussLegendre gauss_legendre(std::size_t n, prec_t p) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, prec_t>, GaussLegendre> cache;
  {
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find({n, p});
    if (it != cache.end()) return it->second;
  }
  GaussLegendre g;
  const Real tol = ldexp(Real(1L, p), -static_cast<long>(p) + 8);
  for (std::size_t i = 1; i <= n; ++i) {
    Real x(std::cos(M_PI * (static_cast<double>(i) - 0.25) / (static_cast<double>(n) + 0.5)), p);
    Real dp(p);
    for (int it = 0; it < 200; ++it) {
      Real p0(1L, p), p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        Real p2 = ((2 * static_cast<long>(k) - 1) * x * p1 - (static_cast<long>(k) - 1) * p0) / static_cast<long>(k);
        p0 = std::move(p1);
        p1 = std::move(p2);
      }
      dp = static_cast<long>(n) * (x * p1 - p0) / (x * x - 1);
      Real dx = p1 / dp;
      x -= dx;
      if (abs(dx) <= tol) {
        if (it > 0) break;
      }
    }
    g.w.push_back(2 / ((1 - x * x) * dp * dp));
    g.x.push_back(std::move(x));
  }
  std::lock_guard<std::mutex> lk(mu);
  cache.emplace(std::make_pair(n, p), g);
  return g;
}

// Composite Gauss-Legendre over `panels` equal panels of [a, b].
template <class F>
Real integrate_gl(F&& f, const Real& a, const Real& b, std::size_t panels, const GaussLegendre& g) {
  const prec_t p = std::max(a.prec(), b.prec());
  Real total(p);
  Real h = (b - a) / static_cast<long>(panels);
  for (std::size_t k = 0; k < panels; ++k) {
    Real lo = a + h * static_cast<long>(k);
    Real mid = lo + h / 2, half = h / 2;
    Real s(p);
    for (std::size_t i = 0; i < g.x.size(); ++i) s.add_mul(g.w[i], f(mid + half * g.x[i]));
    total.add_mul(s, half);
  }
  return total;
}

}  // namespace expfit
