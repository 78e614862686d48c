#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "expfit/condnum.hpp"
#include "expfit/mpnum.hpp"
#include "expfit/spectral.hpp"

namespace expfit {

// ---- Integer and scalar helpers ----

// Psi(n; N1) = sum_{j=n+1}^{N1} (j^2 - n^2).
inline long psi(long n, long n1) {
  if (n < 1 || n > n1) fail(Errc::IndexOutOfRange, "psi needs 1 <= n <= n1");
  long s = 0;
  for (long j = n + 1; j <= n1; ++j) s += j * j - n * n;
  return s;
}

// a(eta) = 1/6 + eta^3/3 - eta^2/2, positive on (0, 1).
inline Real eta_cubic_coefficient(const Real& eta) {
  if (eta <= 0 || eta >= 1) fail(Errc::EtaOutOfRange, "eta must lie in (0, 1)");
  return Real(1L, eta.prec()) / 6 + pow(eta, 3) / 3 - sqr(eta) / 2;
}

// Smallest N0 <= nmax with Psi(floor(eta N); N) >= a(eta) N^3 for every N in [N0, nmax];
// nmax + 1 when the bound fails at nmax.
inline long psi_bound_onset(const Real& eta, long nmax) {
  Real a = eta_cubic_coefficient(eta);
  long onset = nmax + 1;
  for (long n1 = nmax; n1 >= 1; --n1) {
    long n = static_cast<long>(floor(eta * n1).to_long());
    if (n < 1) break;
    if (Real(psi(n, n1), eta.prec()) < a * pow(Real(n1, eta.prec()), 3)) break;
    onset = n1;
  }
  return onset;
}

// g(x) = -ln(1 - e^-x).
inline Real g_function(const Real& x) {
  if (x <= 0) fail(Errc::NonpositiveArgument, "g_function needs x > 0");
  return -log1p(-exp(-x));
}

namespace detail {

// -ln((1 - e^-y) / y): smooth at 0, equals g(y) + ln y.
inline Real g_regular_part(const Real& y) { return -log(-expm1(-y) / y); }

inline std::size_t quad_nodes(prec_t p) { return 64 * static_cast<std::size_t>(std::max<prec_t>(1, (p + 399) / 400)); }

// int_a^b g(y) dy for 0 <= a < b < inf.
inline Real integrate_g(const Real& a, const Real& b, prec_t p) {
  GaussLegendre gl = gauss_legendre(quad_nodes(p), p);
  Real total(p);
  Real lo = a.with_prec(p);
  const Real one(1L, p);
  if (lo < one) {
    Real hi = min(b.with_prec(p), one);
    // -ln y part in closed form: [y - y ln y], zero at y = 0.
    auto prim = [&](const Real& y) { return y.is_zero() ? Real(p) : y - y * log(y); };
    total += prim(hi) - prim(lo);
    total += integrate_gl([](const Real& y) { return g_regular_part(y); }, lo, hi, 1, gl);
    lo = hi;
  }
  // Panels of width min(8, y/2) keep the log singularity at 0 outside each Bernstein ellipse;
  // beyond y = 2 the integrand is e^-y to leading order and wide panels resolve it.
  const Real cap(8L, p);
  while (lo < b) {
    Real w = min(cap, lo / 2);
    Real hi = min(b.with_prec(p), lo + w);
    total += integrate_gl([](const Real& y) { return g_function(y); }, lo, hi, 1, gl);
    lo = hi;
  }
  return total;
}

}  // namespace detail

// G_{w1,w2}(zeta) = int_{w1}^{w2} g(zeta x) dx; w2 = nullopt means +inf. The upper tail
// is truncated where the remainder falls below 2^-prec relative to the tail start.
inline Real calG(const Real& w1, std::optional<Real> w2, const Real& zeta) {
  const prec_t p = std::max(w1.prec(), zeta.prec());
  if (w1 < 0 || (w2 && *w2 <= w1)) fail(Errc::BadInterval, "calG needs 0 <= w1 < w2");
  if (zeta <= 0) fail(Errc::NonpositiveArgument, "calG needs zeta > 0");
  Real a = zeta * w1;
  Real b(p);
  if (w2) {
    b = zeta * w2->with_prec(p);
  } else {
    Real start = max(a, Real(1L, p));
    b = start + Real(static_cast<long>(p), p) * log(Real(2L, p)) + 2;
  }
  return detail::integrate_g(a, b, p) / zeta;
}

// ---- Theta sums and their sandwich bounds ----

struct AnalysisContext {
  RealVec lambdas;  // at least n1 + 1 entries, increasing
  Real delta;
  std::size_t n1 = 0;
  GrowthBounds growth;
  Real tau;
};

// tau = (1 - e^(-3 delta_star upsilon)) / 3.
inline Real separation_tau(const Real& delta_star, const Real& upsilon) {
  if (delta_star <= 0 || upsilon <= 0) fail(Errc::NonpositiveArgument, "separation_tau needs positive inputs");
  return -expm1(-3 * delta_star * upsilon) / 3;
}

inline AnalysisContext make_context(RealVec lambdas, const Real& delta, std::size_t n1) {
  if (lambdas.size() < n1 + 1) fail(Errc::InvalidArgument, "analysis context needs n1 + 1 eigenvalues");
  AnalysisContext c;
  c.growth = estimate_growth_bounds(lambdas);
  c.lambdas = std::move(lambdas);
  c.delta = delta;
  c.n1 = n1;
  c.tau = separation_tau(delta, c.growth.upsilon);
  return c;
}

struct ThetaTriple {
  Real theta1, theta2, theta3;
};

inline ThetaTriple theta_sums(const AnalysisContext& ctx, std::size_t n) {
  if (n < 1 || n > ctx.n1) fail(Errc::IndexOutOfRange, "theta_sums needs 1 <= n <= n1");
  if (ctx.lambdas.size() < ctx.n1 + 1) fail(Errc::InvalidArgument, "theta_sums needs lambda_{n1+1}");
  const prec_t p = std::max(max_prec(ctx.lambdas), ctx.delta.prec());
  const auto& l = ctx.lambdas;
  ThetaTriple t{Real(p), Real(p), Real(p)};
  for (std::size_t j = 1; j <= ctx.n1; ++j) {
    if (j != n) t.theta1 += g_function(ctx.delta * (l[ctx.n1] - l[j - 1]));
    if (j < n) t.theta2 += g_function(ctx.delta * (l[n - 1] - l[j - 1]));
    if (j > n) t.theta3 += g_function(ctx.delta * (l[j - 1] - l[n - 1]));
  }
  return t;
}

struct Interval {
  Real lo, hi;
  bool contains(const Real& x) const { return lo <= x && x <= hi; }
};

// Sandwich bounds for theta1 always, theta2 only for n > 1, theta3 only for n < N1.
struct ThetaBounds {
  Interval theta1;
  std::optional<Interval> theta2, theta3;
};

inline ThetaBounds theta_bounds(const AnalysisContext& ctx, std::size_t n) {
  if (n < 1 || n > ctx.n1) fail(Errc::IndexOutOfRange, "theta_bounds needs 1 <= n <= n1");
  const Real& d = ctx.delta;
  const Real& lo = ctx.growth.upsilon;
  const Real& hi = ctx.growth.Upsilon;
  const long N = static_cast<long>(ctx.n1), k = static_cast<long>(n);
  const prec_t p = d.prec();
  const Real one(1L, p), two(2L, p), zero(p);
  ThetaBounds b;
  b.theta1 = {calG(one, two, d * hi * (2 * N + 1)) - g_function(d * hi * ((N + 1 - k) * (2 * N + 1))),
              calG(zero, std::nullopt, d * lo * N) - g_function(d * lo * ((N + 1 - k) * (N + 1)))};
  if (n > 1) b.theta2 = Interval{calG(one, two, d * hi * (2 * k - 1)), calG(zero, std::nullopt, d * lo * (k + 1))};
  if (k < N) b.theta3 = Interval{calG(one, two, d * hi * (N + k + 1)), calG(zero, std::nullopt, d * lo * (2 * k + 1))};
  return b;
}

// ---- L_n(phi_{N1+1})^2 two ways ----

struct TwoWay {
  Real direct, formula;
};

inline TwoWay lsquared_identity(const AnalysisContext& ctx, std::size_t n) {
  if (n < 1 || n > ctx.n1) fail(Errc::IndexOutOfRange, "lsquared_identity needs 1 <= n <= n1");
  const prec_t p = std::max(max_prec(ctx.lambdas), ctx.delta.prec());
  RealVec phi;
  for (std::size_t j = 0; j <= ctx.n1; ++j) phi.push_back(exp(-ctx.delta * ctx.lambdas[j]));
  RealVec head(phi.begin(), phi.begin() + static_cast<long>(ctx.n1));
  Real direct = sqr(lagrange_eval(head, n, phi[ctx.n1]));
  ThetaTriple t = theta_sums(ctx, n);
  Real expo = -2 * t.theta1;
  if (n < ctx.n1) {
    Real s(p);
    for (std::size_t j = n + 1; j <= ctx.n1; ++j) s += ctx.lambdas[j - 1] - ctx.lambdas[n - 1];
    expo -= 2 * ctx.delta * s;
    expo += 2 * t.theta3;
  }
  if (n > 1) expo += 2 * t.theta2;
  return {direct, exp(expo)};
}

// ---- Symmetric polynomials and means ----

// e_0..e_len of the values, one pass with the per-element update e_j += x e_{j-1}.
inline RealVec elementary_symmetric_all(const RealVec& v, prec_t p) {
  RealVec e = zeros(v.size() + 1, p);
  e[0] = Real(1L, p);
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j >= 1; --j) e[j].add_mul(v[i], e[j - 1]);
  return e;
}

struct SymmetricMean {
  Real s_k, m_k;
};

inline SymmetricMean symmetric_means(const RealVec& values, std::size_t k) {
  if (k < 1 || k > values.size()) fail(Errc::KOutOfRange, "symmetric_means needs 1 <= k <= len");
  const prec_t p = max_prec(values);
  RealVec e = elementary_symmetric_all(values, p);
  Real c = binomial(static_cast<long>(values.size()), static_cast<long>(k), p);
  return {e[k], e[k] / c};
}

// M_l^(1/l) <= M_k^(1/k) for all 1 <= k <= l <= len, with a 2^(-prec/2) relative slack.
inline bool maclaurin_check(const RealVec& values) {
  for (const auto& v : values)
    if (v < 0) fail(Errc::NegativeValue, "maclaurin_check needs nonnegative values");
  if (values.empty()) return true;
  const prec_t p = max_prec(values);
  RealVec e = elementary_symmetric_all(values, p);
  const long n = static_cast<long>(values.size());
  RealVec r;
  for (long k = 1; k <= n; ++k) r.push_back(root(e[k] / binomial(n, k, p), static_cast<unsigned long>(k)));
  const Real slack = 1 + ldexp(Real(1L, p), -static_cast<long>(p / 2));
  for (std::size_t k = 0; k < r.size(); ++k)
    for (std::size_t l = k + 1; l < r.size(); ++l)
      if (r[l] > r[k] * slack) return false;
  return true;
}

// ---- Imaginary error function ----

// (2/sqrt(pi)) sum_k x^(2k+1) / (k! (2k+1)); all terms positive, stops past the peak once
// a term falls below 2^-prec of the partial sum.
inline Real erfi(const Real& x) {
  if (x < 0) fail(Errc::NonpositiveArgument, "erfi needs x >= 0");
  const prec_t p = x.prec();
  if (x.is_zero()) return Real(p);
  Real x2 = sqr(x), t = x, sum(p);
  const Real rel = ldexp(Real(1L, p), -static_cast<long>(p));
  for (long k = 0;; ++k) {
    Real term = t / (2 * k + 1);
    sum += term;
    if (Real(k, p) > x2 && term < sum * rel) break;
    t = t * x2 / (k + 1);
  }
  return 2 * sum / sqrt(pi(p));
}

// ---- Prony polynomial identities ----

namespace detail {

inline RealVec head_moments(const SpectralModel& m, bool with_tail) {
  RealVec phi = m.nodes();
  const prec_t p = m.prec();
  RealVec out = zeros(2 * m.n1, p);
  for (std::size_t n = 0; n < m.lambdas.size(); ++n) {
    if (n >= m.n1 && !with_tail) break;
    Real c = n < m.n1 ? m.amplitudes[n] : m.epsilon * m.amplitudes[n];
    Real pw(1L, p);
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k].add_mul(c, pw);
      pw *= phi[n];
    }
  }
  return out;
}

// det [[1, z, .., z^N1], [m_i .. m_{i+N1}]_{i<N1}].
inline Real prony_det(const RealVec& m, std::size_t n1, const Real& z) {
  const prec_t p = std::max(max_prec(m), z.prec());
  RealMatrix a(n1 + 1, n1 + 1, p);
  Real pw(1L, p);
  for (std::size_t j = 0; j <= n1; ++j) {
    a(0, j) = pw;
    pw *= z;
  }
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j <= n1; ++j) a(i + 1, j) = m[i + j];
  return det_bareiss(a);
}

inline Real vandermonde_squared(const RealVec& x) {
  Real v(1L, max_prec(x));
  for (std::size_t s = 0; s < x.size(); ++s)
    for (std::size_t t = s + 1; t < x.size(); ++t) v *= sqr(x[t] - x[s]);
  return v;
}

}  // namespace detail

struct PbarTwoWays {
  Real det_form, product_form;
};

// Unperturbed homogeneous Prony polynomial: determinant versus
// (prod y_k) (prod_{s<t} (phi_t - phi_s)^2) (prod_s (phi_s - z)). The determinant carries no
// extra (-1)^N1; the N1 = 1 case det = m1 - m0 z = y1 (phi1 - z) fixes the sign.
inline PbarTwoWays pbar_two_ways(const SpectralModel& model, const Real& z) {
  model.validate();
  if (model.n1 > 8) fail(Errc::SizeCap, "pbar_two_ways is capped at N1 = 8");
  const prec_t p = model.prec();
  RealVec m = detail::head_moments(model, false);
  RealVec phi = model.nodes();
  RealVec head(phi.begin(), phi.begin() + static_cast<long>(model.n1));
  Real prod(1L, p);
  for (std::size_t k = 0; k < model.n1; ++k) prod *= model.amplitudes[k] * (head[k] - z);
  prod *= detail::vandermonde_squared(head);
  return {detail::prony_det(m, model.n1, z), prod};
}

namespace detail {

// Increasing index tuples of length k from {1..n}, lexicographic.
inline std::vector<std::vector<std::size_t>> tuples(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (cur.size() == k) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = start; i <= n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 1);
  return out;
}

inline std::vector<std::size_t> complement(const std::vector<std::size_t>& t, std::size_t n) {
  std::vector<std::size_t> c;
  for (std::size_t i = 1; i <= n; ++i)
    if (std::find(t.begin(), t.end(), i) == t.end()) c.push_back(i);
  return c;
}

}  // namespace detail

struct Discrepancy {
  Real formula, oracle;
};

// qbar(z) - pbar(z) for N2 = 1: the closed triple sum over (gamma, beta with 1 in beta, omega)
// against the direct determinant difference.
inline Discrepancy discrepancy_formula(const SpectralModel& model, const Real& z) {
  model.validate();
  if (model.n2 != 1) fail(Errc::UnsupportedTail, "discrepancy formula needs N2 = 1");
  if (model.n1 < 2 || model.n1 > 4) fail(Errc::SizeCap, "discrepancy formula supports N1 in {2, 3, 4}");
  const std::size_t N = model.n1;
  const prec_t p = model.prec();
  RealVec phi = model.nodes();
  const Real& y_tail = model.amplitudes[N];
  const Real& phi_tail = phi[N];

  Real total(p);
  for (const auto& gamma : detail::tuples(N + 1, N)) {
    const std::size_t gc = detail::complement(gamma, N + 1)[0];
    for (const auto& beta : detail::tuples(N + 1, N)) {
      if (beta[0] != 1) continue;
      const std::size_t bc = detail::complement(beta, N + 1)[0];
      const long a = static_cast<long>(gamma[0]) - 1;
      const long b = (static_cast<long>(beta[1]) - 2) + (static_cast<long>(gamma[0]) - 1);
      long sgn = 0;
      for (auto q : gamma) sgn += static_cast<long>(q);
      for (auto q : beta) sgn += static_cast<long>(q);
      Real outer = y_tail * pow(phi_tail, static_cast<long>(bc + gc) - 3) * pow(z, a);
      if (sgn % 2 != 0) outer = -outer;
      for (const auto& omega : detail::tuples(N, N - 1)) {
        RealVec po;
        Real term = outer;
        for (auto o : omega) {
          po.push_back(phi[o - 1]);
          term *= model.amplitudes[o - 1] * pow(phi[o - 1], b) * (phi[o - 1] - z);
        }
        if (gc != 1 && gc != N + 1) {
          RealVec with_z = po;
          with_z.insert(with_z.begin(), z);
          term *= elementary_symmetric_all(with_z, p)[N + 1 - gc];
        }
        if (bc != 2 && bc != N + 1) term *= elementary_symmetric_all(po, p)[N + 1 - bc];
        term *= detail::vandermonde_squared(po);
        total += term;
      }
    }
  }
  Real formula = model.epsilon * total;
  Real oracle = detail::prony_det(detail::head_moments(model, true), N, z) -
                detail::prony_det(detail::head_moments(model, false), N, z);
  return {formula, oracle};
}

// ---- Higher-order adjugates ----

// Entries [adj_r(L)]_{zeta, xi} = (-1)^(sum zeta + sum xi) det L(rows xi^c, cols zeta^c),
// rows and columns indexed by the length-r tuples in lexicographic order.
inline RealMatrix higher_order_adjugate(const RealMatrix& l, std::size_t r) {
  const std::size_t n = l.rows();
  if (l.cols() != n || r > n) fail(Errc::InvalidArgument, "higher_order_adjugate needs square L and r <= n");
  auto idx = detail::tuples(n, r);
  RealMatrix out(idx.size(), idx.size(), l.prec());
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const auto& zeta = idx[a];
      const auto& xi = idx[b];
      std::vector<std::size_t> rows, cols;
      for (auto i : detail::complement(xi, n)) rows.push_back(i - 1);
      for (auto i : detail::complement(zeta, n)) cols.push_back(i - 1);
      Real d = rows.empty() ? Real(1L, l.prec()) : det_bareiss(l.select(rows, cols));
      long s = 0;
      for (auto q : zeta) s += static_cast<long>(q);
      for (auto q : xi) s += static_cast<long>(q);
      out(a, b) = s % 2 == 0 ? d : -d;
    }
  return out;
}

// Rank-one tail matrix: zero first row, row i >= 2 is y_tail (phi^(i-2+j)), j = 0..N1.
inline RealMatrix tail_matrix(const SpectralModel& model) {
  if (model.n2 != 1) fail(Errc::UnsupportedTail, "tail matrix needs N2 = 1");
  const std::size_t N = model.n1;
  RealVec phi = model.nodes();
  RealMatrix d(N + 1, N + 1, model.prec());
  for (std::size_t i = 1; i <= N; ++i)
    for (std::size_t j = 0; j <= N; ++j) d(i, j) = model.amplitudes[N] * pow(phi[N], static_cast<long>(i - 1 + j));
  return d;
}

// Vandermonde determinant with power k omitted (powers 0..m) versus S_{m-k} prod_{i<j} (chi_j - chi_i).
inline TwoWay vandermonde_symmetric_identity(const RealVec& chi, std::size_t k) {
  const std::size_t m = chi.size();
  if (k < 1 || k > m) fail(Errc::KOutOfRange, "vandermonde identity needs 1 <= k <= m");
  const prec_t p = max_prec(chi);
  RealMatrix a(m, m, p);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t col = 0;
    for (std::size_t pw = 0; pw <= m; ++pw) {
      if (pw == k) continue;
      a(i, col++) = pow(chi[i], static_cast<long>(pw));
    }
  }
  Real v(1L, p);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) v *= chi[j] - chi[i];
  return {det_bareiss(a), elementary_symmetric_all(chi, p)[m - k] * v};
}

}  // namespace expfit
