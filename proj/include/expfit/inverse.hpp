#pragma once

#include <optional>
#include <random>
#include <vector>

#include "expfit/mpnum.hpp"
#include "expfit/potential.hpp"
#include "expfit/prony.hpp"
#include "expfit/spectral.hpp"

namespace expfit {

// y(1) of y'' = -(lambda + q) y, y(0) = 0, y'(0) = 1, q = sum a_k cos(2 pi k x); RK4 with
// the shooting module's fixed step, so a zero means lambda is a Dirichlet eigenvalue of
// -d^2/dx^2 - q.
inline Real shoot_boundary_value(const RealVec& coeffs, const Real& lambda) {
  const prec_t p = std::max(max_prec(coeffs), lambda.prec());
  return shoot_y1(ShootingGrid::from(Potential::fourier(with_prec(coeffs, p)), p), lambda);
}

inline Real recovery_loss(const RealVec& coeffs, const RealVec& lambdas) {
  if (lambdas.empty()) fail(Errc::InvalidArgument, "recovery_loss needs eigenvalues");
  const prec_t p = std::max(max_prec(coeffs), max_prec(lambdas));
  ShootingGrid g = ShootingGrid::from(Potential::fourier(with_prec(coeffs, p)), p);
  Real s(p);
  for (const auto& l : lambdas) s += sqr(shoot_y1(g, l));
  return s;
}

struct RecoverOptions {
  std::size_t restarts = 5;  // one zero start, the rest uniform in [-0.5, 0.5]
  std::size_t max_iters = 500;
  std::optional<double> grad_step;  // default max(1e-8, 2^(-prec/4))
  std::uint64_t seed = 0;
  prec_t prec = 128;
  double grad_tol = 1e-10;
  double loss_tol = 1e-18;
};

struct RecoveryMetrics {
  RealVec eig_rel_err;  // per recovered eigenvalue, against its matched true mode
  RealVec coeff_abs_err;
  Real potential_l2_err;
};

struct RecoveryReport {
  RealVec recovered_coeffs;  // a_0..a_{M-1}, zero past N_opt
  RealVec recovered_lambdas;
  Real loss_final;
  std::size_t restarts_used = 0;
  std::size_t iterations = 0;  // of the best restart
  bool converged = false;
  std::optional<RecoveryMetrics> metrics;
};

namespace detail {

struct BfgsOutcome {
  RealVec x;
  Real loss;
  std::size_t iterations = 0;
  bool converged = false;
  bool hit_cap = false;
};

inline Real default_grad_step(const RecoverOptions& opt) {
  return Real(opt.grad_step ? *opt.grad_step : std::max(1e-8, std::ldexp(1.0, -static_cast<int>(opt.prec / 4))), opt.prec);
}

// Central differences with step base (1 + |x_k|) per coordinate.
template <class Loss>
RealVec fd_gradient(Loss&& loss, const RealVec& at, const Real& base) {
  RealVec g;
  for (std::size_t k = 0; k < at.size(); ++k) {
    Real h = base * (1 + abs(at[k]));
    RealVec xp = at, xm = at;
    xp[k] += h;
    xm[k] -= h;
    g.push_back((loss(xp) - loss(xm)) / (2 * h));
  }
  return g;
}

// BFGS on the inverse Hessian with Armijo backtracking (c = 1e-4) and central-difference
// gradients; a failed line search retries once along -g, then stops.
template <class Loss>
BfgsOutcome bfgs(Loss&& loss, RealVec x, const RecoverOptions& opt) {
  const std::size_t n = x.size();
  const prec_t p = opt.prec;
  const Real base_step = default_grad_step(opt);
  auto grad = [&](const RealVec& at) { return fd_gradient(loss, at, base_step); };
  auto dot = [&](const RealVec& a, const RealVec& b) {
    Real s(p);
    for (std::size_t i = 0; i < a.size(); ++i) s.add_mul(a[i], b[i]);
    return s;
  };
  auto max_abs = [&](const RealVec& v) {
    Real m(p);
    for (const auto& e : v) m = max(m, abs(e));
    return m;
  };
  const Real c1("1e-4", p), grad_tol(opt.grad_tol, p), loss_tol(opt.loss_tol, p);
  RealMatrix h = RealMatrix::identity(n, p);
  BfgsOutcome out;
  Real f = loss(x);
  RealVec g = grad(x);
  bool first = true;
  for (std::size_t it = 0;; ++it) {
    out.iterations = it;
    if (max_abs(g) < grad_tol || f < loss_tol) {
      out.converged = true;
      break;
    }
    if (it == opt.max_iters) {
      out.hit_cap = true;
      break;
    }
    RealVec d = h * g;
    for (auto& e : d) e = -e;
    Real slope = dot(g, d);
    if (slope >= 0) {
      h = RealMatrix::identity(n, p);
      d = g;
      for (auto& e : d) e = -e;
      slope = dot(g, d);
    }
    Real alpha(1L, p), f_new(p);
    RealVec x_new;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      x_new = x;
      for (std::size_t i = 0; i < n; ++i) x_new[i].add_mul(alpha, d[i]);
      f_new = loss(x_new);
      if (f_new <= f + c1 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha /= 2;
    }
    if (!accepted) {
      if (first) break;
      h = RealMatrix::identity(n, p);
      first = true;
      continue;
    }
    RealVec g_new = grad(x_new);
    RealVec s(n, Real(p)), y(n, Real(p));
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = g_new[i] - g[i];
    }
    Real sy = dot(s, y);
    if (sy > 0) {
      if (first) {
        // Scale the initial inverse Hessian by s.y / y.y.
        Real scale = sy / dot(y, y);
        h = RealMatrix::identity(n, p);
        for (std::size_t i = 0; i < n; ++i) h(i, i) = scale;
      }
      RealVec hy = h * y;
      Real yhy = dot(y, hy);
      Real rho = 1 / sy;
      Real coef = (1 + yhy * rho) * rho;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          h(i, j) += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
      first = false;
    }
    x = std::move(x_new);
    f = std::move(f_new);
    g = std::move(g_new);
  }
  out.x = std::move(x);
  out.loss = std::move(f);
  return out;
}

}  // namespace detail

// The optimizer's finite-difference gradient of recovery_loss at the coefficients' precision.
inline RealVec recovery_loss_gradient(const RealVec& coeffs, const RealVec& lambdas, const RecoverOptions& opt = {}) {
  return detail::fd_gradient([&](const RealVec& a) { return recovery_loss(a, lambdas); }, coeffs,
                             detail::default_grad_step(opt));
}

// Fits N_opt = min(len(lambdas), M) cosine coefficients so that the first N_opt lambdas
// solve the shooting boundary condition; best of the restarts, zero-padded to M. Restarts stop
// early once one reaches the loss tolerance.
inline RecoveryReport recover_potential(const RealVec& lambdas, std::size_t m, const RecoverOptions& opt = {}) {
  if (m < 1) fail(Errc::InvalidArgument, "recover_potential needs M >= 1");
  if (lambdas.empty()) fail(Errc::InvalidArgument, "recover_potential needs eigenvalues");
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (lambdas[i] <= lambdas[i - 1]) fail(Errc::InvalidArgument, "recover_potential needs increasing eigenvalues");
  const prec_t p = opt.prec;
  const std::size_t n_opt = std::min(lambdas.size(), m);
  // The loss runs over the first N_opt eigenvalues.
  RealVec lam = with_prec(RealVec(lambdas.begin(), lambdas.begin() + static_cast<long>(n_opt)), p);
  FourierTable table(n_opt, p);
  auto loss = [&](const RealVec& a) {
    ShootingGrid g = table.grid(a);
    Real s(p);
    for (const auto& l : lam) s += sqr(shoot_y1(g, l));
    return s;
  };

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::optional<detail::BfgsOutcome> best;
  std::size_t used = 0, capped = 0;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, opt.restarts); ++r) {
    RealVec x0;
    for (std::size_t k = 0; k < n_opt; ++k) x0.emplace_back(r == 0 ? 0.0 : u(rng), p);
    detail::BfgsOutcome o = detail::bfgs(loss, std::move(x0), opt);
    ++used;
    if (o.hit_cap) ++capped;
    if (!best || o.loss < best->loss) best = std::move(o);
    if (best->loss < Real(opt.loss_tol, p)) break;
  }
  if (capped == used) fail(Errc::OptimizerDiverged, "every restart reached max_iters");

  RecoveryReport rep;
  rep.recovered_coeffs = best->x;
  while (rep.recovered_coeffs.size() < m) rep.recovered_coeffs.emplace_back(p);
  rep.recovered_lambdas = lam;
  rep.loss_final = best->loss;
  rep.restarts_used = used;
  rep.iterations = best->iterations;
  rep.converged = best->converged;
  return rep;
}

// Cosine coefficients a_0 = int q, a_k = 2 int q cos(2 pi k x), by 256 panels of
// 8-point Gauss-Legendre.
inline RealVec cosine_coefficients(const Potential& q, std::size_t m, prec_t p) {
  if (q.kind == Potential::Kind::FourierCosine) {
    RealVec a = with_prec(q.coeffs, p);
    a.resize(std::max(a.size(), m), Real(p));
    a.resize(m);
    return a;
  }
  GaussLegendre gl = gauss_legendre(8, p);
  const Real two_pi = 2 * pi(p);
  RealVec a;
  for (std::size_t k = 0; k < m; ++k) {
    Real v = integrate_gl([&](const Real& x) { return q(x) * cos(two_pi * x * static_cast<long>(k)); }, Real(p),
                          Real(1L, p), 256, gl);
    a.push_back(k == 0 ? v : 2 * v);
  }
  return a;
}

// ||q_true - q_rec||_2 on [0,1] by 256 panels of 8-point Gauss-Legendre.
inline Real potential_l2_error(const Potential& q_true, const RealVec& coeffs, prec_t p) {
  GaussLegendre gl = gauss_legendre(8, p);
  Potential rec = Potential::fourier(with_prec(coeffs, p));
  return sqrt(integrate_gl([&](const Real& x) { return sqr(q_true(x) - rec(x)); }, Real(p), Real(1L, p), 256, gl));
}

struct GroundTruth {
  Potential q;
  RealVec lambdas;  // increasing
};

inline RecoveryMetrics recovery_metrics(const RecoveryReport& rep, const GroundTruth& truth) {
  const prec_t p = max_prec(rep.recovered_coeffs);
  RecoveryMetrics m;
  Matching match = match_exponents(rep.recovered_lambdas, truth.lambdas);
  m.eig_rel_err.assign(rep.recovered_lambdas.size(), Real(p));
  for (std::size_t t = 0; t < truth.lambdas.size(); ++t) {
    long r = match.of_true[t];
    if (r < 0) continue;
    const Real& lt = truth.lambdas[t];
    m.eig_rel_err[static_cast<std::size_t>(r)] = abs(rep.recovered_lambdas[static_cast<std::size_t>(r)] - lt) / abs(lt);
  }
  RealVec a_true = cosine_coefficients(truth.q, rep.recovered_coeffs.size(), p);
  for (std::size_t k = 0; k < rep.recovered_coeffs.size(); ++k) m.coeff_abs_err.push_back(abs(rep.recovered_coeffs[k] - a_true[k]));
  m.potential_l2_err = potential_l2_error(truth.q, rep.recovered_coeffs, p);
  return m;
}

// Filtered Prony on the trace, then the potential from the recovered eigenvalues.
inline RecoveryReport end_to_end_recover(const MeasurementTrace& trace, std::size_t n_prony, std::size_t m,
                                         const Real& amp_threshold, const RecoverOptions& opt = {},
                                         const std::optional<GroundTruth>& truth = std::nullopt) {
  PronyResult pr = filtered_prony(trace.samples, n_prony, trace.delta, amp_threshold);
  if (pr.exponents.empty()) fail(Errc::NoModesRecovered, "filtered Prony kept no modes");
  RecoveryReport rep = recover_potential(pr.exponents, m, opt);
  rep.recovered_lambdas = pr.exponents;
  if (truth) rep.metrics = recovery_metrics(rep, *truth);
  return rep;
}

struct ConvergenceRow {
  std::size_t m = 0;            // n_prony
  std::size_t n_recovered = 0;  // N_0
  std::size_t n_used = 0;       // N_opt = min(N_0, M)
  Real eig_rel_err;             // max over the N_opt eigenvalues fed to the potential fit
  Real coeff_abs_err;           // max over the M coefficients
  Real potential_l2_err;
  RecoveryReport report;
};

// For each m: n_prony = m with a fixed coefficient count M.
inline std::vector<ConvergenceRow> convergence_study(const MeasurementTrace& trace, const std::vector<std::size_t>& m_grid,
                                                     std::size_t m_coeffs, const Real& amp_threshold,
                                                     const GroundTruth& truth, const RecoverOptions& opt = {}) {
  std::vector<ConvergenceRow> rows;
  for (std::size_t m : m_grid) {
    ConvergenceRow row;
    row.m = m;
    row.report = end_to_end_recover(trace, m, m_coeffs, amp_threshold, opt, truth);
    row.n_recovered = row.report.recovered_lambdas.size();
    row.n_used = std::min(row.n_recovered, m_coeffs);
    const RecoveryMetrics& mt = *row.report.metrics;
    row.eig_rel_err = Real(opt.prec);
    for (std::size_t k = 0; k < row.n_used; ++k) row.eig_rel_err = max(row.eig_rel_err, mt.eig_rel_err[k]);
    row.coeff_abs_err = Real(opt.prec);
    for (const auto& e : mt.coeff_abs_err) row.coeff_abs_err = max(row.coeff_abs_err, e);
    row.potential_l2_err = mt.potential_l2_err;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace expfit
