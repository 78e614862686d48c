#pragma once

#include <algorithm>
#include <numeric>
#include <optional>

#include "expfit/mpnum.hpp"
#include "expfit/spectral.hpp"

namespace expfit {

struct PronyDiagnostics {
  Real hankel_rank_gap;     // smallest / largest |pivot| (classical) or retained sigma (filtered)
  Real max_root_residual;   // max |q(r)| / sum |c_i| |r|^i over the computed roots
  std::size_t discarded_roots = 0;
  bool complex_roots_retained = false;  // some root failed the realness filter
  bool rank_deficient = false;
  ComplexVec complex_roots;             // roots dropped by the realness filter
};

struct PronyResult {
  Real delta;
  RealVec nodes;       // descending
  RealVec exponents;   // -ln(node) / delta, ascending
  RealVec amplitudes;
  std::size_t n_recovered = 0;
  PronyDiagnostics diagnostics;
};

// realness_tol default: 10^(-digits/4).
inline Real default_realness_tol(prec_t p) {
  return pow(Real(10L, p), -static_cast<long>(digits_of(p) / 4));
}

inline RealMatrix build_hankel(const RealVec& samples, std::size_t n) {
  if (samples.size() < 2 * n) fail(Errc::InsufficientSamples, "build_hankel needs >= 2n samples");
  RealMatrix h(n, n, max_prec(samples));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = samples[i + j];
  return h;
}

inline RealVec nodes_to_exponents(const RealVec& nodes, const Real& delta) {
  RealVec out;
  for (const auto& z : nodes) {
    if (z <= 0) fail(Errc::NonpositiveNode, "node must be positive");
    Real l = -log(z) / delta;
    if (l.is_zero()) l = Real(l.prec());  // normalize -0
    out.push_back(std::move(l));
  }
  return out;
}

// Solves sum_j y_j nodes_j^k = samples_k, k = 0..len-1; least squares when tall.
inline RealVec recover_amplitudes(const RealVec& nodes, const RealVec& samples, long floor_bits = -1) {
  const std::size_t n = nodes.size();
  if (samples.size() < n) fail(Errc::InsufficientSamples, "recover_amplitudes needs len(samples) >= len(nodes)");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (nodes[i] == nodes[j]) fail(Errc::DuplicateNodes, "recover_amplitudes: repeated node");
  if (n == 0) return {};
  const prec_t p = std::max(max_prec(nodes), max_prec(samples));
  RealMatrix v(samples.size(), n, p);
  for (std::size_t j = 0; j < n; ++j) {
    Real pw(1L, p);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      v(k, j) = pw;
      pw *= nodes[j];
    }
  }
  if (samples.size() == n) {
    if (floor_bits < 0) floor_bits = static_cast<long>(p) - 64;
    return solve_square(v, samples, floor_bits);
  }
  return solve_least_squares(v, samples).x;
}

namespace detail {

inline Real root_residual(const Poly& q, const Complex& r) {
  Real scale(q.prec());
  Real ar = abs(r);
  Real pw(1L, q.prec());
  for (const auto& c : q.coeffs) {
    scale.add_mul(abs(c), pw);
    pw *= ar;
  }
  return abs(q(r)) / scale;
}

inline bool is_real_root(const Complex& r, const Real& tol) {
  Real m = max(abs(r), Real(1L, r.prec()));
  return abs(r.im) <= tol * m;
}

// Sorts nodes descending and finalizes exponents and counts.
inline void finalize(PronyResult& res) {
  std::vector<std::size_t> idx(res.nodes.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return res.nodes[a] > res.nodes[b]; });
  RealVec n, a;
  for (std::size_t i : idx) {
    n.push_back(res.nodes[i]);
    a.push_back(res.amplitudes[i]);
  }
  res.nodes = std::move(n);
  res.amplitudes = std::move(a);
  res.exponents = nodes_to_exponents(res.nodes, res.delta);
  res.n_recovered = res.nodes.size();
}

}  // namespace detail

// Classical Prony: monic Prony polynomial from the square Hankel system, its
// roots as nodes, amplitudes from the square Vandermonde system. Roots that
// fail the realness filter, and nonpositive roots, are dropped and counted.
inline PronyResult classical_prony(const RealVec& samples, std::size_t n1, const Real& delta,
                                   std::optional<Real> realness_tol = std::nullopt) {
  if (samples.size() != 2 * n1) fail(Errc::InsufficientSamples, "classical_prony needs exactly 2*n1 samples");
  const prec_t p = max_prec(samples);
  const Real tol = realness_tol ? *realness_tol : default_realness_tol(p);
  RealMatrix h = build_hankel(samples, n1);
  RealVec rhs;
  for (std::size_t i = 0; i < n1; ++i) rhs.push_back(-samples[n1 + i]);
  LUFactors lu;
  try {
    lu = lu_factor(h, static_cast<long>(p) - 64);
  } catch (const Error& e) {
    if (e.code() == Errc::SingularMatrix) fail(Errc::SingularHankel, e.what());
    throw;
  }
  RealVec qc = lu_solve(lu, rhs);
  Poly q;
  q.coeffs = qc;
  q.coeffs.push_back(Real(1L, p));

  PronyResult res;
  res.delta = delta.with_prec(p);
  Real pmin = abs(lu.lu(0, 0)), pmax = pmin;
  for (std::size_t i = 0; i < n1; ++i) {
    Real a = abs(lu.lu(i, i));
    pmin = min(pmin, a);
    pmax = max(pmax, a);
  }
  res.diagnostics.hankel_rank_gap = pmin / pmax;
  res.diagnostics.max_root_residual = Real(p);
  ComplexVec roots = poly_roots(q);
  for (const auto& r : roots) {
    res.diagnostics.max_root_residual = max(res.diagnostics.max_root_residual, detail::root_residual(q, r));
    if (!detail::is_real_root(r, tol)) {
      res.diagnostics.complex_roots_retained = true;
      res.diagnostics.complex_roots.push_back(r);
      ++res.diagnostics.discarded_roots;
    } else if (r.re <= 0) {
      ++res.diagnostics.discarded_roots;
    } else {
      res.nodes.push_back(r.re);
    }
  }
  if (res.nodes.size() == n1) {
    RealVec head(samples.begin(), samples.begin() + static_cast<long>(n1));
    res.amplitudes = recover_amplitudes(res.nodes, head);
  } else {
    res.amplitudes = recover_amplitudes(res.nodes, samples);
  }
  detail::finalize(res);
  return res;
}

// Homogeneous Prony polynomial: det of [1 z .. z^n1 ; rows (m_i .. m_{i+n1})],
// expanded along the first row; coefficient of z^j is (-1)^j times the minor
// with column j removed.
inline Poly homogeneous_prony_poly(const RealVec& samples, std::size_t n1) {
  if (samples.size() < 2 * n1) fail(Errc::InsufficientSamples, "homogeneous_prony_poly needs >= 2*n1 samples");
  const prec_t p = max_prec(samples);
  RealMatrix s(n1, n1 + 1, p);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j <= n1; ++j) s(i, j) = samples[i + j];
  // Hadamard bound on the minors sets the vanishing scale.
  Real hadamard(1L, p);
  for (std::size_t i = 0; i < n1; ++i) hadamard *= norm2(s.row(i));
  const Real zero_floor = ldexp(hadamard, -static_cast<long>(p / 2));
  Poly out;
  bool any = false;
  std::vector<std::size_t> rows(n1);
  std::iota(rows.begin(), rows.end(), 0);
  for (std::size_t j = 0; j <= n1; ++j) {
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c <= n1; ++c)
      if (c != j) cols.push_back(c);
    Real minor = det_bareiss(s.select(rows, cols));
    if (abs(minor) > zero_floor) any = true;
    out.coeffs.push_back(j % 2 == 0 ? minor : -minor);
  }
  if (!any) fail(Errc::DegenerateAllZero, "every maximal minor vanishes");
  return out;
}

// Filtered Prony: least-squares Hankel solve, realness and positivity filter,
// amplitude threshold, amplitudes recomputed once on the surviving nodes.
inline PronyResult filtered_prony(const RealVec& samples, std::size_t n_prony, const Real& delta,
                                  const Real& amp_threshold, std::optional<Real> realness_tol = std::nullopt) {
  if (samples.size() < 2 * n_prony) fail(Errc::InsufficientSamples, "filtered_prony needs >= 2*n_prony samples");
  const prec_t p = max_prec(samples);
  const Real tol = realness_tol ? *realness_tol : default_realness_tol(p);
  RealVec used(samples.begin(), samples.begin() + static_cast<long>(2 * n_prony));
  RealMatrix h = build_hankel(used, n_prony);
  RealVec rhs;
  for (std::size_t i = 0; i < n_prony; ++i) rhs.push_back(-used[n_prony + i]);
  LeastSquares ls = solve_least_squares(h, rhs);
  Poly q;
  q.coeffs = ls.x;
  q.coeffs.push_back(Real(1L, p));

  PronyResult res;
  res.delta = delta.with_prec(p);
  res.diagnostics.rank_deficient = ls.rank_deficient;
  res.diagnostics.hankel_rank_gap =
      ls.rank > 0 ? ls.sigma[ls.rank - 1] / ls.sigma[0] : Real(p);
  res.diagnostics.max_root_residual = Real(p);
  RealVec kept;
  for (const auto& r : poly_roots(q)) {
    res.diagnostics.max_root_residual = max(res.diagnostics.max_root_residual, detail::root_residual(q, r));
    if (!detail::is_real_root(r, tol)) {
      res.diagnostics.complex_roots_retained = true;
      res.diagnostics.complex_roots.push_back(r);
      ++res.diagnostics.discarded_roots;
    } else if (r.re <= 0 || r.re >= 1) {
      ++res.diagnostics.discarded_roots;
    } else {
      kept.push_back(r.re);
    }
  }
  // Numerically coincident real roots would make the Vandermonde singular.
  std::sort(kept.begin(), kept.end(), [](const Real& a, const Real& b) { return a > b; });
  RealVec distinct;
  for (auto& z : kept) {
    if (!distinct.empty() && abs(distinct.back() - z) <= ldexp(abs(z), -static_cast<long>(p) + 16)) {
      ++res.diagnostics.discarded_roots;
      continue;
    }
    distinct.push_back(std::move(z));
  }
  RealVec amps = recover_amplitudes(distinct, used);
  RealVec survivors;
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    if (abs(amps[i]) >= amp_threshold) survivors.push_back(distinct[i]);
    else ++res.diagnostics.discarded_roots;
  }
  res.nodes = survivors;
  res.amplitudes = survivors.size() == distinct.size() ? amps : recover_amplitudes(survivors, used);
  detail::finalize(res);
  return res;
}

// Greedy nearest matching in log-node space (equivalently |lambda_hat - lambda|).
// Returns, for each true exponent, the index of its recovered match or -1.
struct Matching {
  std::vector<long> of_true;
  std::size_t spurious = 0;
};

inline Matching match_exponents(const RealVec& recovered, const RealVec& truth) {
  struct Pair {
    double dist;
    std::size_t r, t;
  };
  std::vector<Pair> pairs;
  for (std::size_t r = 0; r < recovered.size(); ++r)
    for (std::size_t t = 0; t < truth.size(); ++t) {
      Real d = abs(recovered[r] - truth[t]);
      pairs.push_back({d.is_zero() ? -1e300 : d.log_abs(), r, t});
    }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.dist < b.dist; });
  Matching m;
  m.of_true.assign(truth.size(), -1);
  std::vector<bool> used(recovered.size(), false);
  for (const auto& pr : pairs) {
    if (used[pr.r] || m.of_true[pr.t] >= 0) continue;
    used[pr.r] = true;
    m.of_true[pr.t] = static_cast<long>(pr.r);
  }
  m.spurious = static_cast<std::size_t>(std::count(used.begin(), used.end(), false));
  return m;
}

}  // namespace expfit
