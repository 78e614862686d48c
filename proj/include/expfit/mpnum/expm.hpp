#pragma once

#include <cmath>

#include "expfit/mpnum/linalg.hpp"

namespace expfit {

namespace detail {

// [13/13] Pade coefficients of exp.
inline const long kPade13[14] = {64764752532480000L, 32382376266240000L, 7771770303897600L, 1187353796428800L,
                                 129060195264000L,   10559470521600L,    670442572800L,     33522128640L,
                                 1323241920L,        40840800L,          960960L,           16380L,
                                 182L,               1L};

// log2 of the leading [13/13] remainder constant (13!)^2 / (26! 27!).
inline constexpr double kPade13RemainderLog2 = -116.45;

}  // namespace detail

// e^(A t) by scaling and squaring with the [13/13] Pade approximant. The
// squaring count s makes ||A t / 2^s||_inf <= 0.5 and, in addition, pushes the
// Pade remainder below 2^(-prec).
inline RealMatrix matrix_exp(const RealMatrix& a, const Real& t) {
  if (!a.square()) fail(Errc::InvalidArgument, "matrix_exp: matrix not square");
  const std::size_t n = a.rows();
  const prec_t p = std::max(a.prec(), t.prec());
  RealMatrix x = t * with_prec(a, p);
  Real nrm = norm_inf(x);
  long s = 0;
  if (!nrm.is_zero()) {
    double l2 = nrm.log_abs() / std::log(2.0);
    double theta_l2 = (-static_cast<double>(p) - detail::kPade13RemainderLog2) / 27.0;
    double need = std::max(l2 + 1.0, l2 - theta_l2);
    s = std::max(0L, static_cast<long>(std::ceil(need)));
  }
  if (s > 0)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) x(i, j) = ldexp(x(i, j), -s);

  RealMatrix ident = RealMatrix::identity(n, p);
  RealMatrix x2 = x * x;
  RealMatrix x4 = x2 * x2;
  RealMatrix x6 = x4 * x2;
  auto b = [&](int i) { return Real(detail::kPade13[i], p); };
  auto lin = [&](const RealMatrix& m6, int i6, const RealMatrix& m4, int i4, const RealMatrix& m2, int i2,
                 const RealMatrix& m0, int i0) {
    RealMatrix r(n, n, p);
    Real c6 = b(i6), c4 = b(i4), c2 = b(i2), c0 = b(i0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        Real& v = r(i, j);
        v.add_mul(c6, m6(i, j));
        v.add_mul(c4, m4(i, j));
        v.add_mul(c2, m2(i, j));
        v.add_mul(c0, m0(i, j));
      }
    return r;
  };
  // Odd part U = X (X6 (b13 X6 + b11 X4 + b9 X2) + b7 X6 + b5 X4 + b3 X2 + b1 I).
  RealMatrix uinner(n, n, p);
  {
    Real c13 = b(13), c11 = b(11), c9 = b(9);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        uinner(i, j).add_mul(c13, x6(i, j));
        uinner(i, j).add_mul(c11, x4(i, j));
        uinner(i, j).add_mul(c9, x2(i, j));
      }
  }
  RealMatrix u = x * (x6 * uinner + lin(x6, 7, x4, 5, x2, 3, ident, 1));
  // Even part V = X6 (b12 X6 + b10 X4 + b8 X2) + b6 X6 + b4 X4 + b2 X2 + b0 I.
  RealMatrix vinner(n, n, p);
  {
    Real c12 = b(12), c10 = b(10), c8 = b(8);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        vinner(i, j).add_mul(c12, x6(i, j));
        vinner(i, j).add_mul(c10, x4(i, j));
        vinner(i, j).add_mul(c8, x2(i, j));
      }
  }
  RealMatrix v = x6 * vinner + lin(x6, 6, x4, 4, x2, 2, ident, 0);
  // Solve (V - U) R = (V + U) column by column.
  LUFactors f = lu_factor(v - u, std::numeric_limits<long>::max() / 4);
  RealMatrix num = v + u;
  RealMatrix r(n, n, p);
  for (std::size_t j = 0; j < n; ++j) {
    RealVec col = lu_solve(f, num.col(j));
    for (std::size_t i = 0; i < n; ++i) r(i, j) = std::move(col[i]);
  }
  for (long k = 0; k < s; ++k) r = r * r;
  return r;
}

}  // namespace expfit
