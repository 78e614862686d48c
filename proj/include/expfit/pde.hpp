#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "expfit/mpnum.hpp"
#include "expfit/potential.hpp"
#include "expfit/spectral.hpp"

namespace expfit {

// Default working precision for PDE traces.
inline constexpr prec_t kPdePrec = 512;

// f(x) = sum_{k>=1} c_k sin(pi k x); used for initial conditions and measurement kernels.
struct SineSeries {
  RealVec coeffs;  // c_1..c_K

  Real operator()(const Real& x) const {
    const prec_t p = std::max(max_prec(coeffs), x.prec());
    Real s(p);
    Real w = pi(p) * x;
    for (std::size_t k = 0; k < coeffs.size(); ++k) s.add_mul(coeffs[k], sin(w * static_cast<long>(k + 1)));
    return s;
  }
};

using MeasurementKernel = SineSeries;

// f(x) = sum_{k=1}^{n} (-1)^(k+1) k^-3 sin(pi k x).
inline SineSeries default_initial_condition(std::size_t n_terms = 60, prec_t p = kPdePrec) {
  SineSeries f;
  for (std::size_t k = 1; k <= n_terms; ++k) {
    Real c = Real(1L, p) / static_cast<long>(k * k * k);
    f.coeffs.push_back(k % 2 == 1 ? c : -c);
  }
  return f;
}

// a_0 = 0 and a_1..a_{M-1} uniform in [1, 2] from the seed.
inline Potential random_fourier_potential(std::size_t m, std::uint64_t seed, prec_t p = kPdePrec) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(1.0, 2.0);
  RealVec a{Real(p)};
  for (std::size_t k = 1; k < m; ++k) a.emplace_back(u(rng), p);
  return Potential::fourier(std::move(a));
}

// c_1..c_M uniform in [1, 2]; the stream continues after the potential's draws when the
// same generator is shared, so callers pass a distinct seed.
inline MeasurementKernel random_kernel(std::size_t m, std::uint64_t seed, prec_t p = kPdePrec) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(1.0, 2.0);
  MeasurementKernel c;
  for (std::size_t k = 0; k < m; ++k) c.coeffs.emplace_back(u(rng), p);
  return c;
}

struct ChebD2 {
  RealVec nodes;  // x_j = (1 - cos(pi j / N)) / 2, increasing from 0 to 1
  RealMatrix d2;  // second derivative in x
};

// Chebyshev-Gauss-Lobatto collocation on [0,1] with n_x nodes. D1 takes its diagonal
// from the negative row sums, so D1 and D2 annihilate constants exactly.
inline ChebD2 cheb_diff2(std::size_t n_x, prec_t p) {
  if (n_x < 4) fail(Errc::TooFewNodes, "cheb_diff2 needs n_x >= 4");
  const std::size_t n = n_x - 1;
  RealVec t;
  for (std::size_t j = 0; j <= n; ++j) t.push_back(cos(pi(p) * static_cast<long>(j) / static_cast<long>(n)));
  ChebD2 out;
  for (const auto& tj : t) out.nodes.push_back((1 - tj) / 2);
  RealMatrix d1(n_x, n_x, p);
  auto c = [&](std::size_t j) { return (j == 0 || j == n ? 2L : 1L) * (j % 2 == 0 ? 1L : -1L); };
  for (std::size_t i = 0; i < n_x; ++i) {
    Real rs(p);
    for (std::size_t j = 0; j < n_x; ++j) {
      if (i == j) continue;
      // d/dx = -2 d/dt under x = (1 - t) / 2.
      d1(i, j) = Real(-2 * c(i), p) / (c(j) * (t[i] - t[j]));
      rs += d1(i, j);
    }
    d1(i, i) = -rs;
  }
  out.d2 = d1 * d1;
  return out;
}

struct ForwardSolution {
  RealVec x_nodes;  // all n_x nodes, boundaries included
  RealVec t_nodes;  // n_t equispaced times in [0, t_final]
  RealMatrix grid;  // z(x_i, t_j), boundary rows zero
};

// Interior operator M = D2 + diag(q) so that z_t = M z has decaying modes e^(-lambda t),
// lambda the eigenvalues of -M.
inline RealMatrix interior_operator(const ChebD2& cd, const Potential& q) {
  const std::size_t m = cd.nodes.size() - 2;
  const prec_t p = cd.d2.prec();
  RealMatrix a(m, m, p);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) a(i, j) = cd.d2(i + 1, j + 1);
    a(i, i) += q(cd.nodes[i + 1]);
  }
  return a;
}

// z(., t_j) = e^(M t_j) f; one exponential over the uniform step, applied n_t - 1 times.
inline ForwardSolution forward_solve(const Potential& q, const SineSeries& f, const Real& t_final, std::size_t n_x,
                                     std::size_t n_t, prec_t p = kPdePrec) {
  if (t_final <= 0) fail(Errc::InvalidArgument, "forward_solve needs t_final > 0");
  if (n_t < 2) fail(Errc::InvalidArgument, "forward_solve needs n_t >= 2");
  ChebD2 cd = cheb_diff2(n_x, p);
  RealMatrix a = interior_operator(cd, q);
  const std::size_t m = n_x - 2;
  Real dt = t_final.with_prec(p) / static_cast<long>(n_t - 1);
  RealMatrix step = matrix_exp(a, dt);

  ForwardSolution sol;
  sol.x_nodes = cd.nodes;
  for (std::size_t j = 0; j < n_t; ++j) sol.t_nodes.push_back(dt * static_cast<long>(j));
  sol.grid = RealMatrix(n_x, n_t, p);
  RealVec z;
  for (std::size_t i = 1; i <= m; ++i) z.push_back(f(cd.nodes[i]));
  for (std::size_t j = 0; j < n_t; ++j) {
    if (j > 0) z = step * z;
    for (std::size_t i = 0; i < m; ++i) sol.grid(i + 1, j) = z[i];
  }
  return sol;
}

// Eigenvalues of -M nearest to the first-order guesses pi^2 k^2 - 2 int q sin^2(pi k x),
// refined by shifted inverse iteration from sin(pi k x) with the quotient update
// sigma += (v.v) / (v.w), w = (-M - sigma)^-1 v. Returned increasing.
inline RealVec discrete_eigenvalues(const Potential& q, std::size_t n_x, std::size_t count, prec_t p = kPdePrec) {
  ChebD2 cd = cheb_diff2(n_x, p);
  RealMatrix a = interior_operator(cd, q);
  const std::size_t m = n_x - 2;
  if (count > m) fail(Errc::InvalidArgument, "discrete_eigenvalues: count exceeds interior size");
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) a(i, j) = -a(i, j);

  GaussLegendre gl = gauss_legendre(32, p);
  const Real pi_p = pi(p);
  RealVec out;
  const Real tol = ldexp(Real(1L, p), -static_cast<long>(p) + 32);
  for (std::size_t k = 1; k <= count; ++k) {
    Real avg = integrate_gl([&](const Real& x) { return q(x) * sqr(sin(pi_p * x * static_cast<long>(k))); },
                            Real(p), Real(1L, p), 2 * k, gl);
    Real sigma = sqr(pi_p) * static_cast<long>(k * k) - 2 * avg;
    RealVec v;
    for (std::size_t i = 1; i <= m; ++i) v.push_back(sin(pi_p * cd.nodes[i] * static_cast<long>(k)));
    bool converged = false;
    for (int it = 0; it < 60 && !converged; ++it) {
      RealMatrix shifted = a;
      for (std::size_t i = 0; i < m; ++i) shifted(i, i) -= sigma;
      LUFactors f = lu_factor(std::move(shifted), std::numeric_limits<long>::max() / 4);
      RealVec w;
      try {
        w = lu_solve(f, v);
      } catch (const Error&) {
        converged = true;  // shift is an eigenvalue to working precision
        break;
      }
      Real vv(p), vw(p), ww(p);
      for (std::size_t i = 0; i < m; ++i) {
        vv.add_mul(v[i], v[i]);
        vw.add_mul(v[i], w[i]);
        ww.add_mul(w[i], w[i]);
      }
      Real ds = vv / vw;
      sigma += ds;
      Real nrm = sqrt(ww);
      for (std::size_t i = 0; i < m; ++i) v[i] = w[i] / nrm;
      converged = abs(ds) <= tol * abs(sigma);
    }
    if (!converged) fail(Errc::NoConvergence, "discrete_eigenvalues: inverse iteration stalled");
    out.push_back(sigma);
  }
  std::sort(out.begin(), out.end());
  const Real sep = ldexp(Real(1L, p), -static_cast<long>(p / 2));
  for (std::size_t k = 1; k < out.size(); ++k)
    if (out[k] - out[k - 1] <= sep * abs(out[k])) fail(Errc::NoConvergence, "discrete_eigenvalues: two guesses met one eigenvalue");
  return out;
}

namespace detail {

// Barycentric weights for Chebyshev-Gauss-Lobatto nodes: (-1)^j, halved at the ends.
inline RealVec cgl_weights(std::size_t n_x, prec_t p) {
  RealVec w;
  for (std::size_t j = 0; j < n_x; ++j) {
    Real v(j % 2 == 0 ? 1L : -1L, p);
    if (j == 0 || j + 1 == n_x) v = v / 2;
    w.push_back(v);
  }
  return w;
}

// Row of interpolation weights l_j(x0) over the nodes.
inline RealVec barycentric_row(const RealVec& nodes, const RealVec& w, const Real& x0) {
  const prec_t p = std::max(max_prec(nodes), x0.prec());
  RealVec row = zeros(nodes.size(), p);
  for (std::size_t j = 0; j < nodes.size(); ++j)
    if (x0 == nodes[j]) {
      row[j] = Real(1L, p);
      return row;
    }
  Real den(p);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    row[j] = w[j] / (x0 - nodes[j]);
    den += row[j];
  }
  for (auto& r : row) r /= den;
  return row;
}

// Applies a linear functional on each slice at the requested times: exact slice when the
// time is on the grid to 2^(-prec/2), else linear interpolation between neighbours.
inline RealVec apply_in_time(const ForwardSolution& sol, const RealVec& functional, const RealVec& times) {
  const std::size_t n_t = sol.t_nodes.size();
  const prec_t p = sol.grid.prec();
  const Real& t_end = sol.t_nodes.back();
  const Real dt = t_end / static_cast<long>(n_t - 1);
  const Real snap = ldexp(Real(1L, p), -static_cast<long>(p / 2));
  auto slice = [&](std::size_t j) {
    Real s(p);
    for (std::size_t i = 0; i < functional.size(); ++i) s.add_mul(functional[i], sol.grid(i, j));
    return s;
  };
  RealVec out;
  for (const auto& t : times) {
    if (t < 0 || t > t_end * (1 + snap)) fail(Errc::TimeOutOfRange, "sample time outside the solved span");
    Real pos = t / dt;
    Real r = floor(pos + Real("0.5", p));
    if (abs(pos - r) <= snap * max(Real(1L, p), r)) {
      out.push_back(slice(static_cast<std::size_t>(r.to_long())));
      continue;
    }
    std::size_t j = static_cast<std::size_t>(floor(pos).to_long());
    Real frac = pos - static_cast<long>(j);
    out.push_back((1 - frac) * slice(j) + frac * slice(j + 1));
  }
  return out;
}

}  // namespace detail

inline MeasurementTrace point_trace(const ForwardSolution& sol, const Real& x0, const RealVec& sample_times) {
  if (x0 <= 0 || x0 >= 1) fail(Errc::InvalidArgument, "point_trace needs x0 in (0, 1)");
  const prec_t p = sol.grid.prec();
  RealVec row = detail::barycentric_row(sol.x_nodes, detail::cgl_weights(sol.x_nodes.size(), p), x0.with_prec(p));
  MeasurementTrace tr;
  tr.samples = detail::apply_in_time(sol, row, sample_times);
  tr.delta = sample_times.size() > 1 ? sample_times[1] - sample_times[0] : Real(p);
  tr.source = MeasurementTrace::Source::PdePoint;
  return tr;
}

// y(t) = int_0^1 c(x) z(x, t) dx over the slice interpolant, by 64 panels of 16-point
// Gauss-Legendre; the rule collapses to one weight per node.
inline MeasurementTrace integral_trace(const ForwardSolution& sol, const MeasurementKernel& kernel,
                                       const RealVec& sample_times) {
  const prec_t p = sol.grid.prec();
  const std::size_t n_x = sol.x_nodes.size();
  RealVec bw = detail::cgl_weights(n_x, p);
  GaussLegendre gl = gauss_legendre(16, p);
  RealVec functional = zeros(n_x, p);
  const long panels = 64;
  const Real h = Real(1L, p) / panels;
  for (long k = 0; k < panels; ++k) {
    Real mid = h * k + h / 2;
    for (std::size_t i = 0; i < gl.x.size(); ++i) {
      Real x = mid + h / 2 * gl.x[i];
      Real wc = gl.w[i] * h / 2 * kernel(x);
      RealVec row = detail::barycentric_row(sol.x_nodes, bw, x);
      for (std::size_t j = 0; j < n_x; ++j) functional[j].add_mul(wc, row[j]);
    }
  }
  MeasurementTrace tr;
  tr.samples = detail::apply_in_time(sol, functional, sample_times);
  tr.delta = sample_times.size() > 1 ? sample_times[1] - sample_times[0] : Real(p);
  tr.source = MeasurementTrace::Source::PdeIntegral;
  return tr;
}

// t_k = k delta, k = 0..count-1.
inline RealVec uniform_times(const Real& delta, std::size_t count) {
  RealVec t;
  for (std::size_t k = 0; k < count; ++k) t.push_back(delta * static_cast<long>(k));
  return t;
}

}  // namespace expfit
