#pragma once

#include <numeric>
#include <utility>
#include <vector>

#include "expfit/mpnum/matrix.hpp"

namespace expfit {

// Row-pivoted LU factors packed in one matrix: unit-lower L below the
// diagonal, U on and above it; row i of the factors is row perm[i] of A.
struct LUFactors {
  RealMatrix lu;
  std::vector<std::size_t> perm;
  int sign = 1;
};

// Pivot floor: |pivot| > 2^(-floor_bits) * ||A||_inf, else SingularMatrix.
// floor_bits < 0 selects the default precision/2.
inline LUFactors lu_factor(RealMatrix a, long floor_bits = -1) {
  if (!a.square()) fail(Errc::InvalidArgument, "lu_factor: matrix not square");
  const std::size_t n = a.rows();
  const prec_t p = a.prec();
  if (floor_bits < 0) floor_bits = static_cast<long>(p / 2);
  Real floor = ldexp(norm_inf(a), -floor_bits);
  LUFactors f{std::move(a), std::vector<std::size_t>(n), 1};
  std::iota(f.perm.begin(), f.perm.end(), 0);
  RealMatrix& m = f.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    Real best = abs(m(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      Real v = abs(m(i, k));
      if (v > best) {
        best = std::move(v);
        piv = i;
      }
    }
    if (best <= floor) fail(Errc::SingularMatrix, "pivot below floor at column " + std::to_string(k));
    if (piv != k) {
      m.swap_rows(piv, k);
      std::swap(f.perm[piv], f.perm[k]);
      f.sign = -f.sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      if (m(i, k).is_zero()) continue;
      m(i, k) /= m(k, k);
      const Real& l = m(i, k);
      for (std::size_t j = k + 1; j < n; ++j) m(i, j).sub_mul(l, m(k, j));
    }
  }
  return f;
}

inline RealVec lu_solve(const LUFactors& f, const RealVec& b) {
  const std::size_t n = f.lu.rows();
  if (b.size() != n) fail(Errc::InvalidArgument, "lu_solve: rhs length mismatch");
  RealVec x;
  x.reserve(n);
  for (std::size_t i = 0; i < n; ++i) x.push_back(b[f.perm[i]]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i].sub_mul(f.lu(i, j), x[j]);
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i].sub_mul(f.lu(i, j), x[j]);
    x[i] /= f.lu(i, i);
  }
  return x;
}

// Solves A^T x = b with the factors of A.
inline RealVec lu_solve_transposed(const LUFactors& f, const RealVec& b) {
  const std::size_t n = f.lu.rows();
  RealVec w = b;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) w[i].sub_mul(f.lu(j, i), w[j]);
    w[i] /= f.lu(i, i);
  }
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = i + 1; j < n; ++j) w[i].sub_mul(f.lu(j, i), w[j]);
  RealVec x = zeros(n, max_prec(w));
  for (std::size_t i = 0; i < n; ++i) x[f.perm[i]] = w[i];
  return x;
}

inline RealVec solve_square(const RealMatrix& a, const RealVec& b, long floor_bits = -1) {
  return lu_solve(lu_factor(a, floor_bits), b);
}

// Determinant by LU; exact zero when elimination meets an all-zero column.
inline Real det(const RealMatrix& a) {
  try {
    LUFactors f = lu_factor(a, std::numeric_limits<long>::max() / 4);
    Real d(static_cast<long>(f.sign), f.lu.prec());
    for (std::size_t i = 0; i < a.rows(); ++i) d *= f.lu(i, i);
    return d;
  } catch (const Error& e) {
    if (e.code() != Errc::SingularMatrix) throw;
    return Real(a.prec());
  }
}

// Fraction-free (Bareiss) elimination with magnitude pivoting.
inline Real det_bareiss(RealMatrix m) {
  if (!m.square()) fail(Errc::InvalidArgument, "det_bareiss: matrix not square");
  const std::size_t n = m.rows();
  const prec_t p = m.prec();
  if (n == 0) return Real(1L, p);
  int sign = 1;
  Real prev(1L, p);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (abs(m(i, k)) > abs(m(piv, k))) piv = i;
    if (m(piv, k).is_zero()) return Real(p);
    if (piv != k) {
      m.swap_rows(piv, k);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        Real v = m(i, j) * m(k, k);
        v.sub_mul(m(i, k), m(k, j));
        m(i, j) = v / prev;
      }
    }
    prev = m(k, k);
  }
  Real d = m(n - 1, n - 1);
  return sign < 0 ? -d : d;
}

struct SVD {
  RealMatrix u;    // m x n, orthonormal columns where sigma > 0
  RealVec sigma;   // length n, descending
  RealMatrix v;    // n x n orthogonal
  int sweeps = 0;
};

// One-sided (Hestenes) Jacobi SVD of a tall matrix.
inline SVD svd_jacobi(const RealMatrix& a, int max_sweeps = 80) {
  const std::size_t m = a.rows(), n = a.cols();
  if (m < n) fail(Errc::InvalidArgument, "svd_jacobi: needs rows >= cols");
  const prec_t p = a.prec();
  RealMatrix u = a;
  RealMatrix v = RealMatrix::identity(n, p);
  const Real tol = ldexp(Real(1L, p), -static_cast<long>(p) + 8);
  SVD out;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        Real alpha(p), beta(p), gamma(p);
        for (std::size_t r = 0; r < m; ++r) {
          alpha.add_mul(u(r, i), u(r, i));
          beta.add_mul(u(r, j), u(r, j));
          gamma.add_mul(u(r, i), u(r, j));
        }
        if (gamma.is_zero() || abs(gamma) <= tol * sqrt(alpha * beta)) continue;
        rotated = true;
        Real zeta = (beta - alpha) / (2 * gamma);
        Real t = Real(1L, p) / (abs(zeta) + sqrt(1 + sqr(zeta)));
        if (zeta.sign() < 0) t = -t;
        Real c = Real(1L, p) / sqrt(1 + sqr(t));
        Real s = c * t;
        for (std::size_t r = 0; r < m; ++r) {
          Real ui = u(r, i), uj = u(r, j);
          u(r, i) = c * ui - s * uj;
          u(r, j) = s * ui + c * uj;
        }
        for (std::size_t r = 0; r < n; ++r) {
          Real vi = v(r, i), vj = v(r, j);
          v(r, i) = c * vi - s * vj;
          v(r, j) = s * vi + c * vj;
        }
      }
    }
    out.sweeps = sweep + 1;
    if (!rotated) break;
    if (sweep + 1 == max_sweeps) fail(Errc::NoConvergence, "svd_jacobi: sweep cap reached");
  }
  RealVec sigma = zeros(n, p);
  for (std::size_t j = 0; j < n; ++j) {
    Real s(p);
    for (std::size_t r = 0; r < m; ++r) s.add_mul(u(r, j), u(r, j));
    sigma[j] = sqrt(s);
    if (!sigma[j].is_zero())
      for (std::size_t r = 0; r < m; ++r) u(r, j) /= sigma[j];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });
  std::vector<std::size_t> all_rows(m), all_vrows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0);
  std::iota(all_vrows.begin(), all_vrows.end(), 0);
  out.u = u.select(all_rows, order);
  out.v = v.select(all_vrows, order);
  for (std::size_t j = 0; j < n; ++j) out.sigma.push_back(sigma[order[j]]);
  return out;
}

struct LeastSquares {
  RealVec x;
  std::size_t rank = 0;
  bool rank_deficient = false;  // smallest retained sigma < 2^(-p/3) * largest
  RealVec sigma;
};

// Minimum-norm least squares via SVD; singular values at rounding level
// (sigma <= 2^(-p+16) * sigma_max) are treated as zero.
inline LeastSquares solve_least_squares(const RealMatrix& a, const RealVec& b) {
  if (a.rows() < a.cols()) fail(Errc::InvalidArgument, "solve_least_squares: needs rows >= cols");
  if (b.size() != a.rows()) fail(Errc::InvalidArgument, "solve_least_squares: rhs length mismatch");
  const prec_t p = std::max(a.prec(), max_prec(b));
  SVD s = svd_jacobi(with_prec(a, p));
  const std::size_t n = a.cols();
  LeastSquares out;
  out.x = zeros(n, p);
  out.sigma = s.sigma;
  if (n == 0 || s.sigma[0].is_zero()) {
    out.rank_deficient = n > 0;
    return out;
  }
  const Real cut = ldexp(s.sigma[0], -static_cast<long>(p) + 16);
  const Real warn = ldexp(s.sigma[0], -static_cast<long>(p / 3));
  for (std::size_t j = 0; j < n; ++j) {
    if (s.sigma[j] <= cut) {
      out.rank_deficient = true;
      break;
    }
    Real c(p);
    for (std::size_t r = 0; r < a.rows(); ++r) c.add_mul(s.u(r, j), b[r]);
    c /= s.sigma[j];
    for (std::size_t r = 0; r < n; ++r) out.x[r].add_mul(c, s.v(r, j));
    ++out.rank;
    if (s.sigma[j] < warn) out.rank_deficient = true;
  }
  return out;
}

struct SymEig {
  RealVec values;   // ascending
  RealMatrix vectors;  // columns
};

// Cyclic Jacobi eigensolver for symmetric matrices.
inline SymEig sym_eig(RealMatrix a, int max_sweeps = 100) {
  if (!a.square()) fail(Errc::InvalidArgument, "sym_eig: matrix not square");
  const std::size_t n = a.rows();
  const prec_t p = a.prec();
  RealMatrix v = RealMatrix::identity(n, p);
  const Real tol = ldexp(Real(1L, p), -static_cast<long>(p) + 4);
  for (int sweep = 0;; ++sweep) {
    Real off(p), scale(p);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) off.add_mul(a(i, j), a(i, j));
        scale.add_mul(a(i, j), a(i, j));
      }
    if (off <= sqr(tol) * scale) break;
    if (sweep == max_sweeps) fail(Errc::NoConvergence, "sym_eig: sweep cap reached");
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (a(i, j).is_zero()) continue;
        Real theta = (a(j, j) - a(i, i)) / (2 * a(i, j));
        Real t = Real(1L, p) / (abs(theta) + sqrt(1 + sqr(theta)));
        if (theta.sign() < 0) t = -t;
        Real c = Real(1L, p) / sqrt(1 + sqr(t));
        Real s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          Real aki = a(k, i), akj = a(k, j);
          a(k, i) = c * aki - s * akj;
          a(k, j) = s * aki + c * akj;
        }
        for (std::size_t k = 0; k < n; ++k) {
          Real aik = a(i, k), ajk = a(j, k);
          a(i, k) = c * aik - s * ajk;
          a(j, k) = s * aik + c * ajk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          Real vki = v(k, i), vkj = v(k, j);
          v(k, i) = c * vki - s * vkj;
          v(k, j) = s * vki + c * vkj;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  SymEig out;
  for (std::size_t k : order) out.values.push_back(a(k, k));
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  out.vectors = v.select(rows, order);
  return out;
}

}  // namespace expfit
