#pragma once

#include <cstddef>
#include <vector>

#include "expfit/mpnum/real.hpp"

namespace expfit {

using RealVec = std::vector<Real>;

inline RealVec zeros(std::size_t n, prec_t prec) { return RealVec(n, Real(prec)); }

inline prec_t max_prec(const RealVec& v) {
  prec_t p = MPFR_PREC_MIN;
  for (const auto& x : v) p = std::max(p, x.prec());
  return p;
}

// Dense row-major matrix of Reals.
class RealMatrix {
 public:
  RealMatrix() = default;
  RealMatrix(std::size_t rows, std::size_t cols, prec_t prec)
      : rows_(rows), cols_(cols), a_(rows * cols, Real(prec)) {}

  static RealMatrix identity(std::size_t n, prec_t prec) {
    RealMatrix m(n, n, prec);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Real(1L, prec);
    return m;
  }
  static RealMatrix diagonal(const RealVec& d) {
    RealMatrix m(d.size(), d.size(), max_prec(d));
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  prec_t prec() const { return a_.empty() ? kDefaultPrec : max_prec(a_); }

  Real& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const Real& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  RealVec row(std::size_t i) const { return RealVec(a_.begin() + i * cols_, a_.begin() + (i + 1) * cols_); }
  RealVec col(std::size_t j) const {
    RealVec c;
    c.reserve(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c.push_back((*this)(i, j));
    return c;
  }
  void swap_rows(std::size_t i, std::size_t k) {
    if (i == k) return;
    for (std::size_t j = 0; j < cols_; ++j) std::swap(a_[i * cols_ + j], a_[k * cols_ + j]);
  }

  RealMatrix transpose() const {
    RealMatrix t(cols_, rows_, MPFR_PREC_MIN);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  // Submatrix keeping the listed rows and columns, in the given order.
  RealMatrix select(const std::vector<std::size_t>& rs, const std::vector<std::size_t>& cs) const {
    RealMatrix s(rs.size(), cs.size(), MPFR_PREC_MIN);
    for (std::size_t i = 0; i < rs.size(); ++i)
      for (std::size_t j = 0; j < cs.size(); ++j) s(i, j) = (*this)(rs[i], cs[j]);
    return s;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> a_;
};

inline RealMatrix operator*(const RealMatrix& a, const RealMatrix& b) {
  if (a.cols() != b.rows()) fail(Errc::InvalidArgument, "matmul: shape mismatch");
  prec_t p = std::max(a.prec(), b.prec());
  RealMatrix c(a.rows(), b.cols(), p);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Real& aik = a(i, k);
      if (aik.is_zero()) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j).add_mul(aik, b(k, j));
    }
  return c;
}

inline RealVec operator*(const RealMatrix& a, const RealVec& x) {
  if (a.cols() != x.size()) fail(Errc::InvalidArgument, "matvec: shape mismatch");
  prec_t p = std::max(a.prec(), max_prec(x));
  RealVec y = zeros(a.rows(), p);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[i].add_mul(a(i, j), x[j]);
  return y;
}

inline RealMatrix operator+(const RealMatrix& a, const RealMatrix& b) {
  RealMatrix c = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) += b(i, j);
  return c;
}
inline RealMatrix operator-(const RealMatrix& a, const RealMatrix& b) {
  RealMatrix c = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) -= b(i, j);
  return c;
}
inline RealMatrix operator*(const Real& s, const RealMatrix& a) {
  RealMatrix c = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) *= s;
  return c;
}

inline Real norm_inf(const RealVec& v) {
  Real m(max_prec(v));
  for (const auto& x : v) {
    Real a = abs(x);
    if (a > m) m = std::move(a);
  }
  return m;
}
inline Real norm2(const RealVec& v) {
  Real s(max_prec(v));
  for (const auto& x : v) s.add_mul(x, x);
  return sqrt(s);
}
// Max absolute row sum.
inline Real norm_inf(const RealMatrix& a) {
  Real m(a.prec());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Real s(a.prec());
    for (std::size_t j = 0; j < a.cols(); ++j) s += abs(a(i, j));
    if (s > m) m = std::move(s);
  }
  return m;
}
inline Real dot(const RealVec& a, const RealVec& b) {
  Real s(std::max(max_prec(a), max_prec(b)));
  for (std::size_t i = 0; i < a.size(); ++i) s.add_mul(a[i], b[i]);
  return s;
}
inline RealVec operator-(const RealVec& a, const RealVec& b) {
  RealVec c = a;
  for (std::size_t i = 0; i < a.size(); ++i) c[i] -= b[i];
  return c;
}
inline RealVec operator+(const RealVec& a, const RealVec& b) {
  RealVec c = a;
  for (std::size_t i = 0; i < a.size(); ++i) c[i] += b[i];
  return c;
}
inline RealVec operator*(const Real& s, const RealVec& a) {
  RealVec c = a;
  for (auto& x : c) x *= s;
  return c;
}

inline RealVec with_prec(const RealVec& v, prec_t p) {
  RealVec r;
  r.reserve(v.size());
  for (const auto& x : v) r.push_back(x.with_prec(p));
  return r;
}
inline RealMatrix with_prec(const RealMatrix& a, prec_t p) {
  RealMatrix r(a.rows(), a.cols(), p);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j).with_prec(p);
  return r;
}

}  // namespace expfit
