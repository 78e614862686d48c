#pragma once

#include <algorithm>

#include "expfit/mpnum.hpp"

namespace expfit {

// 1-D potential on [0,1].
struct Potential {
  enum class Kind { FourierCosine, Triangle, Tabulated };

  Kind kind = Kind::FourierCosine;
  RealVec coeffs;  // a_0..a_{M-1}: q(x) = sum a_k cos(2 pi k x)
  RealVec tab_x;   // increasing abscissae, piecewise-linear in between
  RealVec tab_v;
  prec_t prec = kDefaultPrec;

  static Potential zero(prec_t p) { return fourier({Real(p)}); }
  static Potential constant(const Real& g) { return fourier({g}); }
  static Potential fourier(RealVec a) {
    Potential q;
    q.kind = Kind::FourierCosine;
    q.prec = max_prec(a);
    q.coeffs = std::move(a);
    return q;
  }
  // q(x) = 1 - |x - 1/2| - 3/4, zero mean on [0,1].
  static Potential triangle(prec_t p) {
    Potential q;
    q.kind = Kind::Triangle;
    q.prec = p;
    return q;
  }
  static Potential tabulated(RealVec x, RealVec v) {
    if (x.size() != v.size() || x.size() < 2) fail(Errc::InvalidArgument, "tabulated potential needs >= 2 points");
    Potential q;
    q.kind = Kind::Tabulated;
    q.prec = std::max(max_prec(x), max_prec(v));
    q.tab_x = std::move(x);
    q.tab_v = std::move(v);
    return q;
  }

  Real operator()(const Real& x) const {
    const prec_t p = std::max(prec, x.prec());
    switch (kind) {
      case Kind::FourierCosine: {
        Real s(p);
        Real w = 2 * pi(p) * x;
        for (std::size_t k = 0; k < coeffs.size(); ++k) s.add_mul(coeffs[k], cos(w * static_cast<long>(k)));
        return s;
      }
      case Kind::Triangle:
        return Real(1L, p) - abs(x - Real("0.5", p)) - Real("0.75", p);
      case Kind::Tabulated: {
        if (x <= tab_x.front()) return tab_v.front().with_prec(p);
        if (x >= tab_x.back()) return tab_v.back().with_prec(p);
        auto it = std::upper_bound(tab_x.begin(), tab_x.end(), x);
        std::size_t i = static_cast<std::size_t>(it - tab_x.begin());
        Real w = (x - tab_x[i - 1]) / (tab_x[i] - tab_x[i - 1]);
        return tab_v[i - 1] + w * (tab_v[i] - tab_v[i - 1]);
      }
    }
    return Real(p);
  }
};

}  // namespace expfit
