#pragma once

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>

#include "expfit/error.hpp"

namespace expfit {

using prec_t = mpfr_prec_t;

inline constexpr prec_t kDefaultPrec = 256;
inline constexpr mpfr_rnd_t kRnd = MPFR_RNDN;

// Decimal digits carried by `bits` of mantissa.
inline long digits_of(prec_t bits) { return static_cast<long>(std::floor(bits * 0.30103)); }

// Arbitrary-precision real. Every value owns its precision; binary operations
// produce the larger of the operand precisions. No global precision state.
class Real {
 public:
  Real() : Real(kDefaultPrec) {}
  explicit Real(prec_t prec) {
    mpfr_init2(v_, prec);
    mpfr_set_zero(v_, 1);
  }
  Real(long x, prec_t prec) {
    mpfr_init2(v_, prec);
    mpfr_set_si(v_, x, kRnd);
  }
  Real(int x, prec_t prec) : Real(static_cast<long>(x), prec) {}
  Real(unsigned long x, prec_t prec) {
    mpfr_init2(v_, prec);
    mpfr_set_ui(v_, x, kRnd);
  }
  Real(double x, prec_t prec) {
    mpfr_init2(v_, prec);
    mpfr_set_d(v_, x, kRnd);
  }
  // Decimal (or "inf"/"nan") literal, correctly rounded at `prec`.
  Real(std::string_view s, prec_t prec) {
    mpfr_init2(v_, prec);
    std::string tmp(s);
    if (mpfr_set_str(v_, tmp.c_str(), 10, kRnd) != 0 && !valid_literal(tmp))
      fail(Errc::ParseError, "not a decimal number: '" + tmp + "'");
  }
  Real(const char* s, prec_t prec) : Real(std::string_view(s), prec) {}

  Real(const Real& o) {
    mpfr_init2(v_, o.prec());
    mpfr_set(v_, o.v_, kRnd);
  }
  // Moved-from values hold no limbs; they may only be destroyed or assigned.
  Real(Real&& o) noexcept {
    v_[0] = o.v_[0];
    o.v_[0]._mpfr_d = nullptr;
  }
  Real& operator=(const Real& o) {
    if (this == &o) return *this;
    if (!v_[0]._mpfr_d) {
      mpfr_init2(v_, o.prec());
    } else if (prec() != o.prec()) {
      mpfr_set_prec(v_, o.prec());
    }
    mpfr_set(v_, o.v_, kRnd);
    return *this;
  }
  Real& operator=(Real&& o) noexcept {
    std::swap(v_[0], o.v_[0]);
    return *this;
  }
  ~Real() {
    if (v_[0]._mpfr_d) mpfr_clear(v_);
  }

  prec_t prec() const { return mpfr_get_prec(v_); }
  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

  // Copy rounded (or exactly extended) to `p` bits.
  Real with_prec(prec_t p) const {
    Real r(p);
    mpfr_set(r.v_, v_, kRnd);
    return r;
  }
  // Raise own precision to at least `p` without changing the value.
  void widen(prec_t p) {
    if (p > prec()) mpfr_prec_round(v_, p, kRnd);
  }

  double to_double() const { return mpfr_get_d(v_, kRnd); }
  long to_long() const { return mpfr_get_si(v_, MPFR_RNDZ); }
  // log(|x|) as a double; safe for magnitudes outside the double range.
  double log_abs() const {
    if (is_zero()) return -INFINITY;
    long e = 0;
    double m = mpfr_get_d_2exp(&e, v_, kRnd);
    return std::log(std::fabs(m)) + static_cast<double>(e) * std::log(2.0);
  }
  // Binary exponent e with |x| in [2^(e-1), 2^e).
  long exponent2() const { return is_zero() ? std::numeric_limits<long>::min() : mpfr_get_exp(v_); }

  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  bool is_nan() const { return mpfr_nan_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }

  // Scientific decimal with `digits` significant digits, e.g. "1.25e-3".
  std::string to_string(long digits) const {
    if (is_nan()) return "nan";
    if (mpfr_inf_p(v_)) return sign() > 0 ? "inf" : "-inf";
    if (is_zero()) return "0";
    digits = std::max<long>(digits, 2);
    mpfr_exp_t e = 0;
    char* s = mpfr_get_str(nullptr, &e, 10, static_cast<size_t>(digits), v_, kRnd);
    std::string m(s);
    mpfr_free_str(s);
    std::string out;
    if (m[0] == '-') {
      out.push_back('-');
      m.erase(0, 1);
    }
    out.push_back(m[0]);
    std::string frac = m.substr(1);
    while (!frac.empty() && frac.back() == '0') frac.pop_back();
    if (!frac.empty()) out += "." + frac;
    long ex = static_cast<long>(e) - 1;
    if (ex != 0) out += "e" + std::to_string(ex);
    return out;
  }
  // Full precision: floor(prec * log10 2) digits, the round-trip width.
  std::string to_string() const { return to_string(digits_of(prec()) + 1); }

  Real& operator+=(const Real& o) { widen(o.prec()); mpfr_add(v_, v_, o.v_, kRnd); return *this; }
  Real& operator-=(const Real& o) { widen(o.prec()); mpfr_sub(v_, v_, o.v_, kRnd); return *this; }
  Real& operator*=(const Real& o) { widen(o.prec()); mpfr_mul(v_, v_, o.v_, kRnd); return *this; }
  Real& operator/=(const Real& o) { widen(o.prec()); mpfr_div(v_, v_, o.v_, kRnd); return *this; }
  Real& operator+=(long o) { mpfr_add_si(v_, v_, o, kRnd); return *this; }
  Real& operator-=(long o) { mpfr_sub_si(v_, v_, o, kRnd); return *this; }
  Real& operator*=(long o) { mpfr_mul_si(v_, v_, o, kRnd); return *this; }
  Real& operator/=(long o) { mpfr_div_si(v_, v_, o, kRnd); return *this; }

  // this += a*b with a single rounding.
  void add_mul(const Real& a, const Real& b) {
    widen(std::max(a.prec(), b.prec()));
    mpfr_fma(v_, a.v_, b.v_, v_, kRnd);
  }
  // this -= a*b with a single rounding.
  void sub_mul(const Real& a, const Real& b) {
    widen(std::max(a.prec(), b.prec()));
    mpfr_fms(v_, a.v_, b.v_, v_, kRnd);
    mpfr_neg(v_, v_, kRnd);
  }

 private:
  static bool valid_literal(const std::string& s) {
    return s == "nan" || s == "inf" || s == "-inf" || s == "+inf" || s == "@NaN@" || s == "@Inf@";
  }
  mpfr_t v_;
};

namespace detail {
inline prec_t pmax(const Real& a, const Real& b) { return std::max(a.prec(), b.prec()); }
}  // namespace detail

#define EXPFIT_BINOP(op, fn)                                      \
  inline Real operator op(const Real& a, const Real& b) {         \
    Real r(detail::pmax(a, b));                                   \
    fn(r.raw(), a.raw(), b.raw(), kRnd);                          \
    return r;                                                     \
  }                                                               \
  inline Real operator op(Real&& a, const Real& b) {              \
    a.widen(b.prec());                                            \
    fn(a.raw(), a.raw(), b.raw(), kRnd);                          \
    return std::move(a);                                          \
  }
EXPFIT_BINOP(+, mpfr_add)
EXPFIT_BINOP(-, mpfr_sub)
EXPFIT_BINOP(*, mpfr_mul)
EXPFIT_BINOP(/, mpfr_div)
#undef EXPFIT_BINOP

#define EXPFIT_SCALAR_OPS(T)                                                                    \
  inline Real operator+(const Real& a, T b) { Real r(a.prec()); mpfr_add_si(r.raw(), a.raw(), b, kRnd); return r; } \
  inline Real operator+(T b, const Real& a) { return a + b; }                                  \
  inline Real operator-(const Real& a, T b) { Real r(a.prec()); mpfr_sub_si(r.raw(), a.raw(), b, kRnd); return r; } \
  inline Real operator-(T b, const Real& a) { Real r(a.prec()); mpfr_si_sub(r.raw(), b, a.raw(), kRnd); return r; } \
  inline Real operator*(const Real& a, T b) { Real r(a.prec()); mpfr_mul_si(r.raw(), a.raw(), b, kRnd); return r; } \
  inline Real operator*(T b, const Real& a) { return a * b; }                                  \
  inline Real operator/(const Real& a, T b) { Real r(a.prec()); mpfr_div_si(r.raw(), a.raw(), b, kRnd); return r; } \
  inline Real operator/(T b, const Real& a) { Real r(a.prec()); mpfr_si_div(r.raw(), b, a.raw(), kRnd); return r; } \
  inline bool operator==(const Real& a, T b) { return mpfr_cmp_si(a.raw(), b) == 0; }          \
  inline bool operator<(const Real& a, T b) { return mpfr_cmp_si(a.raw(), b) < 0; }            \
  inline bool operator>(const Real& a, T b) { return mpfr_cmp_si(a.raw(), b) > 0; }            \
  inline bool operator<=(const Real& a, T b) { return mpfr_cmp_si(a.raw(), b) <= 0; }          \
  inline bool operator>=(const Real& a, T b) { return mpfr_cmp_si(a.raw(), b) >= 0; }
EXPFIT_SCALAR_OPS(int)
EXPFIT_SCALAR_OPS(long)
#undef EXPFIT_SCALAR_OPS

inline Real operator-(const Real& a) {
  Real r(a.prec());
  mpfr_neg(r.raw(), a.raw(), kRnd);
  return r;
}

inline bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.raw(), b.raw()) != 0; }
inline bool operator!=(const Real& a, const Real& b) { return !(a == b); }
inline bool operator<(const Real& a, const Real& b) { return mpfr_less_p(a.raw(), b.raw()) != 0; }
inline bool operator>(const Real& a, const Real& b) { return mpfr_greater_p(a.raw(), b.raw()) != 0; }
inline bool operator<=(const Real& a, const Real& b) { return mpfr_lessequal_p(a.raw(), b.raw()) != 0; }
inline bool operator>=(const Real& a, const Real& b) { return mpfr_greaterequal_p(a.raw(), b.raw()) != 0; }

inline std::ostream& operator<<(std::ostream& os, const Real& x) { return os << x.to_string(20); }

#define EXPFIT_UNARY(name, fn)          \
  inline Real name(const Real& a) {     \
    Real r(a.prec());                   \
    fn(r.raw(), a.raw(), kRnd);         \
    return r;                           \
  }
EXPFIT_UNARY(abs, mpfr_abs)
EXPFIT_UNARY(sqrt, mpfr_sqrt)
EXPFIT_UNARY(exp, mpfr_exp)
EXPFIT_UNARY(log, mpfr_log)
EXPFIT_UNARY(log1p, mpfr_log1p)
EXPFIT_UNARY(expm1, mpfr_expm1)
EXPFIT_UNARY(sin, mpfr_sin)
EXPFIT_UNARY(cos, mpfr_cos)
EXPFIT_UNARY(sqr, mpfr_sqr)
EXPFIT_UNARY(cbrt, mpfr_cbrt)
#undef EXPFIT_UNARY

inline Real floor(const Real& a) {
  Real r(a.prec());
  mpfr_floor(r.raw(), a.raw());
  return r;
}
inline Real pow(const Real& a, const Real& b) {
  Real r(detail::pmax(a, b));
  mpfr_pow(r.raw(), a.raw(), b.raw(), kRnd);
  return r;
}
inline Real pow(const Real& a, long k) {
  Real r(a.prec());
  mpfr_pow_si(r.raw(), a.raw(), k, kRnd);
  return r;
}
inline Real root(const Real& a, unsigned long k) {
  Real r(a.prec());
  mpfr_rootn_ui(r.raw(), a.raw(), k, kRnd);
  return r;
}
inline Real hypot(const Real& a, const Real& b) {
  Real r(detail::pmax(a, b));
  mpfr_hypot(r.raw(), a.raw(), b.raw(), kRnd);
  return r;
}
inline Real atan2(const Real& y, const Real& x) {
  Real r(detail::pmax(y, x));
  mpfr_atan2(r.raw(), y.raw(), x.raw(), kRnd);
  return r;
}
// x * 2^e, exact.
inline Real ldexp(const Real& a, long e) {
  Real r(a.prec());
  mpfr_mul_2si(r.raw(), a.raw(), e, kRnd);
  return r;
}
inline const Real& max(const Real& a, const Real& b) { return a < b ? b : a; }
inline const Real& min(const Real& a, const Real& b) { return b < a ? b : a; }

inline Real pi(prec_t prec) {
  Real r(prec);
  mpfr_const_pi(r.raw(), kRnd);
  return r;
}
// 2^e at `prec` bits.
inline Real pow2(long e, prec_t prec) { return ldexp(Real(1L, prec), e); }
// The rounding unit 2^(-prec).
inline Real ulp_scale(prec_t prec) { return pow2(-static_cast<long>(prec), prec); }

// Binomial coefficient C(n, k) as an exact Real when it fits in `prec` bits.
inline Real binomial(long n, long k, prec_t prec) {
  Real r(1L, prec);
  if (k < 0 || k > n) return Real(prec);
  for (long i = 1; i <= k; ++i) {
    r *= (n - k + i);
    r /= i;
  }
  return r;
}

// Relative distance |a-b| / max(|b|, tiny); 0 when both vanish.
inline Real rel_err(const Real& a, const Real& b) {
  Real d = abs(a - b);
  if (d.is_zero()) return d;
  Real s = abs(b);
  if (s.is_zero()) return d;
  return d / s;
}

}  // namespace expfit
