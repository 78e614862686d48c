#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "expfit/mpnum.hpp"
#include "expfit/prony.hpp"
#include "expfit/spectral.hpp"

namespace expfit {

// ---- Lagrange / Hermite bases on distinct nodes (n is 1-based) ----

namespace detail {

inline void check_basis_args(const RealVec& nodes, std::size_t n) {
  if (n < 1 || n > nodes.size()) fail(Errc::IndexOutOfRange, "basis index out of range");
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j)
      if (nodes[i] == nodes[j]) fail(Errc::DuplicateNodes, "basis nodes must be distinct");
}

}  // namespace detail

inline Real lagrange_eval(const RealVec& nodes, std::size_t n, const Real& x) {
  detail::check_basis_args(nodes, n);
  const Real& c = nodes[n - 1];
  Real num(1L, std::max(max_prec(nodes), x.prec())), den = num;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (j == n - 1) continue;
    num *= x - nodes[j];
    den *= c - nodes[j];
  }
  return num / den;
}

// L'_n(chi_n) = sum_{k != n} 1 / (chi_n - chi_k).
inline Real lagrange_deriv_at_node(const RealVec& nodes, std::size_t n) {
  detail::check_basis_args(nodes, n);
  Real s(max_prec(nodes));
  for (std::size_t k = 0; k < nodes.size(); ++k)
    if (k != n - 1) s += 1 / (nodes[n - 1] - nodes[k]);
  return s;
}

struct HermitePair {
  Real h;       // [1 - 2 (x - chi_n) L'_n(chi_n)] L_n(x)^2
  Real htilde;  // (x - chi_n) L_n(x)^2
};

inline HermitePair hermite_eval(const RealVec& nodes, std::size_t n, const Real& x) {
  Real l2 = sqr(lagrange_eval(nodes, n, x));
  Real dx = x - nodes[n - 1];
  Real h = (1 - 2 * dx * lagrange_deriv_at_node(nodes, n)) * l2;
  return {std::move(h), dx * l2};
}

// Monomial coefficients of H_n and Htilde_n (degree 2 len - 1).
struct HermiteCoeffs {
  Poly h, htilde;
};

inline HermiteCoeffs hermite_coeffs(const RealVec& nodes, std::size_t n) {
  detail::check_basis_args(nodes, n);
  const prec_t p = max_prec(nodes);
  RealVec others;
  Real den(1L, p);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (j == n - 1) continue;
    others.push_back(nodes[j]);
    den *= nodes[n - 1] - nodes[j];
  }
  Poly l = poly_from_roots(others, p);
  for (auto& c : l.coeffs) c /= den;
  Poly l2 = poly_mul(l, l);
  Poly lin;  // z - chi_n
  lin.coeffs = {-nodes[n - 1], Real(1L, p)};
  HermiteCoeffs out;
  out.htilde = poly_mul(lin, l2);
  Poly fac;  // 1 - 2 (z - chi_n) L'_n(chi_n)
  Real d = lagrange_deriv_at_node(nodes, n);
  fac.coeffs = {1 + 2 * nodes[n - 1] * d, -2 * d};
  out.h = poly_mul(fac, l2);
  return out;
}

// ---- Condition numbers ----

struct ConditionEntry {
  std::size_t n;
  Real k_lambda;
  Real k_y;
};

struct ConditionReport {
  enum class Kind { Analytic, PronyEmpirical };
  Kind kind = Kind::Analytic;
  std::vector<ConditionEntry> per_n;
  std::size_t n1 = 0, n2 = 0;
  Real delta, epsilon, eta;

  Real max_abs_lambda() const {
    Real m(delta.prec());
    for (const auto& e : per_n) m = max(m, abs(e.k_lambda));
    return m;
  }
  Real max_abs_y() const {
    Real m(delta.prec());
    for (const auto& e : per_n) m = max(m, abs(e.k_y));
    return m;
  }
};

inline const char* kind_name(ConditionReport::Kind k) {
  return k == ConditionReport::Kind::Analytic ? "analytic" : "prony_empirical";
}

inline std::size_t recovered_count(std::size_t n1, const Real& eta) {
  if (eta <= 0 || eta > 1) fail(Errc::EtaOutOfRange, "eta must lie in (0, 1]");
  Real f = floor(eta * static_cast<long>(n1));
  return static_cast<std::size_t>(f.to_long());
}

namespace detail {

inline ConditionReport report_shell(const SpectralModel& m, const Real& eta, ConditionReport::Kind kind) {
  ConditionReport r;
  r.kind = kind;
  r.n1 = m.n1;
  r.n2 = m.n2;
  r.delta = m.delta;
  r.epsilon = m.epsilon;
  r.eta = eta.with_prec(m.prec());
  return r;
}

}  // namespace detail

// K_y(n) = sum_tail y_m H_n(phi_m); K_lambda(n) = -sum_tail y_m Htilde_n(phi_m) / (delta y_n phi_n).
inline ConditionReport analytic_condition_numbers(const SpectralModel& model, const Real& eta) {
  model.validate();
  const std::size_t count = recovered_count(model.n1, eta);
  ConditionReport r = detail::report_shell(model, eta, ConditionReport::Kind::Analytic);
  RealVec phi = model.nodes();
  RealVec head(phi.begin(), phi.begin() + static_cast<long>(model.n1));
  const prec_t p = model.prec();
  for (std::size_t n = 1; n <= count; ++n) {
    Real ky(p), kt(p);
    for (std::size_t m = model.n1; m < model.n1 + model.n2; ++m) {
      HermitePair hp = hermite_eval(head, n, phi[m]);
      ky.add_mul(model.amplitudes[m], hp.h);
      kt.add_mul(model.amplitudes[m], hp.htilde);
    }
    Real kl = -kt / (model.delta * model.amplitudes[n - 1] * phi[n - 1]);
    r.per_n.push_back({n, std::move(kl), std::move(ky)});
  }
  return r;
}

enum class PronySolver { Classical, Filtered };

// |lambda_hat - lambda| / eps and |y_hat - y| / eps with the true eps in the denominator.
inline ConditionReport empirical_condition_numbers(const SpectralModel& model, const Real& eta,
                                                   PronySolver solver = PronySolver::Classical) {
  model.validate();
  if (model.epsilon <= 0) fail(Errc::InvalidArgument, "empirical condition numbers need eps > 0");
  const std::size_t count = recovered_count(model.n1, eta);
  ConditionReport r = detail::report_shell(model, eta, ConditionReport::Kind::PronyEmpirical);
  MeasurementTrace tr = synthesize_trace(model);
  PronyResult pr = solver == PronySolver::Classical
                       ? classical_prony(tr.samples, model.n1, model.delta)
                       : filtered_prony(tr.samples, model.n1, model.delta, Real(model.prec()));
  RealVec truth(model.lambdas.begin(), model.lambdas.begin() + static_cast<long>(model.n1));
  Matching mt = match_exponents(pr.exponents, truth);
  for (std::size_t n = 1; n <= count; ++n) {
    long idx = mt.of_true[n - 1];
    if (idx < 0) fail(Errc::RecoveryFailed, "mode " + std::to_string(n) + " not recovered");
    const auto i = static_cast<std::size_t>(idx);
    r.per_n.push_back({n, abs(pr.exponents[i] - truth[n - 1]) / model.epsilon,
                       abs(pr.amplitudes[i] - model.amplitudes[n - 1]) / model.epsilon});
  }
  return r;
}

// Sensitivity of the recovered parameters to unit relative perturbations of the samples:
// sum_k |m_k| |coef_k(Htilde_n)| / (|y_n| phi_n delta) and sum_k |m_k| |coef_k(H_n)|,
// maximized over n <= floor(eta N1). Multiplied by the unit roundoff 2^-prec and divided
// by eps, these bound the part of the empirical condition numbers caused by rounding the
// samples to working precision.
struct RoundoffSensitivity {
  Real lambda;
  Real y;
};

inline RoundoffSensitivity roundoff_sensitivity(const SpectralModel& model, const Real& eta) {
  model.validate();
  const std::size_t count = recovered_count(model.n1, eta);
  const prec_t p = model.prec();
  RealVec phi = model.nodes();
  RealVec head(phi.begin(), phi.begin() + static_cast<long>(model.n1));
  RealVec m = synthesize_trace(model).samples;
  RoundoffSensitivity s{Real(p), Real(p)};
  for (std::size_t n = 1; n <= count; ++n) {
    HermiteCoeffs hc = hermite_coeffs(head, n);
    Real sl(p), sy(p);
    for (std::size_t k = 0; k < m.size(); ++k) {
      Real am = abs(m[k]);
      if (k < hc.htilde.coeffs.size()) sl.add_mul(am, abs(hc.htilde.coeffs[k]));
      if (k < hc.h.coeffs.size()) sy.add_mul(am, abs(hc.h.coeffs[k]));
    }
    sl /= abs(model.amplitudes[n - 1]) * phi[n - 1] * model.delta;
    s.lambda = max(s.lambda, sl);
    s.y = max(s.y, sy);
  }
  return s;
}

// Working precision at which sample rounding stays 2^-margin below the eps signal in the
// aggregated condition numbers, and the aggregates clear the 2^(-prec+64) floor.
inline prec_t required_precision(const SpectralModel& model, const Real& eta, long margin = 16) {
  const prec_t probe = 256;
  SpectralModel m = model.at_prec(probe);
  ConditionReport a = analytic_condition_numbers(m, eta);
  RoundoffSensitivity s = roundoff_sensitivity(m, eta);
  auto need = [&](const Real& sens, const Real& kappa) -> long {
    if (kappa.is_zero()) return 0;
    double bits = (sens.log_abs() - (m.epsilon * kappa).log_abs()) / std::log(2.0);
    double floor_bits = -kappa.log_abs() / std::log(2.0) + 64;
    return static_cast<long>(std::ceil(std::max(bits + static_cast<double>(margin), floor_bits)));
  };
  long bits = std::max({256L, need(s.lambda, a.max_abs_lambda()), need(s.y, a.max_abs_y())});
  return static_cast<prec_t>((bits + 63) / 64 * 64);
}

// ---- Slope fitting ----

struct DecayFit {
  Real slope, intercept, residual;  // residual: RMS of fit residuals
};

// Least-squares line through (ln axis_i, ln(-ln kappa_i)).
inline DecayFit fit_decay_exponent(const RealVec& axis, const RealVec& kappas) {
  if (axis.size() != kappas.size()) fail(Errc::InvalidArgument, "fit_decay_exponent: length mismatch");
  if (axis.size() < 4) fail(Errc::TooFewNodes, "fit_decay_exponent needs >= 4 points");
  const prec_t p = std::max<prec_t>(128, std::max(max_prec(axis), max_prec(kappas)));
  RealVec xs, ys;
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (kappas[i] <= 0 || kappas[i] >= 1) fail(Errc::KappaOutOfRange, "kappa must lie in (0, 1)");
    if (axis[i] <= 0 || (i > 0 && axis[i] <= axis[i - 1])) fail(Errc::InvalidArgument, "axis must be positive increasing");
    xs.push_back(log(axis[i].with_prec(p)));
    ys.push_back(log(-log(kappas[i].with_prec(p))));
  }
  const long n = static_cast<long>(xs.size());
  Real sx(p), sy(p), sxx(p), sxy(p);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx.add_mul(xs[i], xs[i]);
    sxy.add_mul(xs[i], ys[i]);
  }
  Real slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  Real intercept = (sy - slope * sx) / n;
  Real ss(p);
  for (std::size_t i = 0; i < xs.size(); ++i) ss += sqr(ys[i] - intercept - slope * xs[i]);
  return {slope, intercept, sqrt(ss / n)};
}

// ---- Regime sweeps ----

enum class Regime { R1, R2, R3 };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::R1: return "R1";
    case Regime::R2: return "R2";
    case Regime::R3: return "R3";
  }
  return "R1";
}

struct SweepConfig {
  Regime regime = Regime::R1;
  RealVec grid;         // N1 values (R1, R3) or delta values (R2), increasing
  Real fixed;           // delta (R1), N1 (R2), T (R3)
  Real eta;
  Real epsilon;
  prec_t prec_bits = 9000;  // 0 selects required_precision per grid point
  double law_c = 1.0, law_p = 2.0;
  std::size_t n2 = 1;
  bool empirical = true;
};

struct SweepPoint {
  Real axis;
  std::size_t n1 = 0;
  Real delta;
  prec_t prec = 0;
  // [kind][metric], kind 0 = analytic, 1 = empirical; metric 0 = lambda, 1 = y.
  Real kappa[2][2];
  bool excluded[2][2] = {{false, false}, {false, false}};
  // Rounding of the samples alone accounts for >= 1% of the empirical value.
  bool roundoff_dominated[2] = {false, false};
  Real roundoff_floor[2];  // 2^-prec * sensitivity / eps, metric-indexed
  std::string empirical_error;  // nonempty when the Prony solver failed at this point
};

struct SweepResult {
  Regime regime = Regime::R1;
  Real eta, epsilon;
  std::vector<SweepPoint> points;
  std::optional<DecayFit> fits[2][2];
};

inline SpectralModel sweep_model(const SweepConfig& cfg, const Real& axis, prec_t p) {
  std::size_t n1 = 0;
  Real delta(p);
  switch (cfg.regime) {
    case Regime::R1:
      n1 = static_cast<std::size_t>(axis.to_long());
      delta = cfg.fixed.with_prec(p);
      break;
    case Regime::R2:
      n1 = static_cast<std::size_t>(cfg.fixed.to_long());
      delta = axis.with_prec(p);
      break;
    case Regime::R3:
      n1 = static_cast<std::size_t>(axis.to_long());
      delta = cfg.fixed.with_prec(p) / static_cast<long>(n1);
      break;
  }
  return powerlaw_model(cfg.law_c, cfg.law_p, n1, cfg.n2, cfg.epsilon.with_prec(p), delta, p);
}

inline SweepResult regime_sweep(const SweepConfig& cfg) {
  if (cfg.grid.size() < 4) fail(Errc::TooFewNodes, "regime sweep needs >= 4 grid points");
  for (std::size_t i = 1; i < cfg.grid.size(); ++i)
    if (cfg.grid[i] <= cfg.grid[i - 1]) fail(Errc::InvalidArgument, "sweep grid must be increasing");
  SweepResult res;
  res.regime = cfg.regime;
  res.eta = cfg.eta;
  res.epsilon = cfg.epsilon;
  for (const auto& ax : cfg.grid) {
    prec_t p = cfg.prec_bits;
    if (p == 0) p = required_precision(sweep_model(cfg, ax, 256), cfg.eta);
    SpectralModel m = sweep_model(cfg, ax, p);
    SweepPoint pt;
    pt.axis = ax;
    pt.n1 = m.n1;
    pt.delta = m.delta;
    pt.prec = p;
    ConditionReport an = analytic_condition_numbers(m, cfg.eta);
    pt.kappa[0][0] = an.max_abs_lambda();
    pt.kappa[0][1] = an.max_abs_y();
    const Real floor = ldexp(Real(1L, p), -static_cast<long>(p) + 64);
    RoundoffSensitivity sens = roundoff_sensitivity(m, cfg.eta);
    pt.roundoff_floor[0] = ldexp(sens.lambda, -static_cast<long>(p)) / m.epsilon;
    pt.roundoff_floor[1] = ldexp(sens.y, -static_cast<long>(p)) / m.epsilon;
    pt.kappa[1][0] = Real(p);
    pt.kappa[1][1] = Real(p);
    if (cfg.empirical) {
      try {
        ConditionReport em = empirical_condition_numbers(m, cfg.eta);
        pt.kappa[1][0] = em.max_abs_lambda();
        pt.kappa[1][1] = em.max_abs_y();
      } catch (const Error& e) {
        pt.empirical_error = e.what();
      }
    }
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 2; ++j) {
        if (k == 1 && (!cfg.empirical || !pt.empirical_error.empty())) {
          pt.excluded[k][j] = true;
          continue;
        }
        const Real& kv = pt.kappa[k][j];
        pt.excluded[k][j] = kv < floor || kv >= 1 || kv.is_zero();
      }
    for (int j = 0; j < 2; ++j) pt.roundoff_dominated[j] = pt.roundoff_floor[j] >= pt.kappa[0][j] / 100;
    res.points.push_back(std::move(pt));
  }
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j) {
      RealVec ax, kv;
      for (const auto& pt : res.points)
        if (!pt.excluded[k][j]) {
          ax.push_back(pt.axis);
          kv.push_back(pt.kappa[k][j]);
        }
      if (ax.size() >= 4) res.fits[k][j] = fit_decay_exponent(ax, kv);
    }
  return res;
}

// ---- Gautschi diagnostic ----

// max_i prod_{j != i} (1 + |phi_j|) / |phi_i - phi_j|.
inline Real gautschi_bound(const RealVec& nodes) {
  if (nodes.empty()) fail(Errc::TooFewNodes, "gautschi_bound needs at least one node");
  detail::check_basis_args(nodes, 1);
  Real best(max_prec(nodes));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    Real prod(1L, best.prec());
    for (std::size_t j = 0; j < nodes.size(); ++j)
      if (j != i) prod *= (1 + abs(nodes[j])) / abs(nodes[i] - nodes[j]);
    best = max(best, prod);
  }
  return best;
}

}  // namespace expfit
