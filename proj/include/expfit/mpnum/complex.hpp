#pragma once

#include <vector>

#include "expfit/mpnum/real.hpp"

namespace expfit {

struct Complex {
  Real re;
  Real im;

  Complex() = default;
  explicit Complex(prec_t p) : re(p), im(p) {}
  Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
  explicit Complex(const Real& r) : re(r), im(r.prec()) {}

  prec_t prec() const { return std::max(re.prec(), im.prec()); }

  Complex& operator+=(const Complex& o) { re += o.re; im += o.im; return *this; }
  Complex& operator-=(const Complex& o) { re -= o.re; im -= o.im; return *this; }
};

inline Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
inline Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
inline Complex operator-(const Complex& a) { return {-a.re, -a.im}; }
inline Complex operator*(const Complex& a, const Complex& b) {
  Real re = a.re * b.re;
  re.sub_mul(a.im, b.im);
  Real im = a.re * b.im;
  im.add_mul(a.im, b.re);
  return {std::move(re), std::move(im)};
}
inline Complex operator*(const Complex& a, const Real& s) { return {a.re * s, a.im * s}; }
inline Complex operator*(const Real& s, const Complex& a) { return a * s; }
inline Complex operator/(const Complex& a, const Real& s) { return {a.re / s, a.im / s}; }

inline Real norm(const Complex& a) {
  Real n = sqr(a.re);
  n.add_mul(a.im, a.im);
  return n;
}
inline Real abs(const Complex& a) { return hypot(a.re, a.im); }
inline Complex conj(const Complex& a) { return {a.re, -a.im}; }

// Smith's algorithm keeps intermediate magnitudes near the operands'.
inline Complex operator/(const Complex& a, const Complex& b) {
  if (abs(b.re) >= abs(b.im)) {
    Real r = b.im / b.re;
    Real d = b.re + r * b.im;
    return {(a.re + a.im * r) / d, (a.im - a.re * r) / d};
  }
  Real r = b.re / b.im;
  Real d = b.im + r * b.re;
  return {(a.re * r + a.im) / d, (a.im * r - a.re) / d};
}

inline Complex inverse(const Complex& b) {
  Complex one(Real(1L, b.prec()), Real(b.prec()));
  return one / b;
}

using ComplexVec = std::vector<Complex>;

}  // namespace expfit
