#pragma once

#include <cmath>
#include <string>

#include "expfit/mpnum.hpp"
#include "expfit/potential.hpp"

namespace expfit {

// Exponential-sum model: y(t) = sum_{n<=N1} y_n e^(-lambda_n t) + eps * sum_{tail} y_n e^(-lambda_n t).
struct SpectralModel {
  RealVec lambdas;     // length n1 + n2, strictly increasing, positive
  RealVec amplitudes;  // length n1 + n2
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  Real epsilon;
  Real delta;

  prec_t prec() const {
    return std::max({max_prec(lambdas), max_prec(amplitudes), epsilon.prec(), delta.prec()});
  }

  void validate() const {
    if (n1 < 1) fail(Errc::InvalidModel, "n1 must be >= 1");
    if (lambdas.size() != n1 + n2 || amplitudes.size() != n1 + n2)
      fail(Errc::InvalidModel, "lambdas and amplitudes must have length n1 + n2");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      if (lambdas[i] <= 0) fail(Errc::InvalidModel, "lambdas must be positive");
      if (i > 0 && lambdas[i] <= lambdas[i - 1]) fail(Errc::InvalidModel, "lambdas must be strictly increasing");
    }
    for (std::size_t i = 0; i < n1; ++i)
      if (amplitudes[i].is_zero()) fail(Errc::InvalidModel, "leading amplitudes must be nonzero");
    if (epsilon < 0) fail(Errc::InvalidModel, "epsilon must be >= 0");
    if (delta <= 0) fail(Errc::InvalidModel, "delta must be > 0");
  }

  // Assumption on amplitudes: 1/ell <= |y_n| <= ell (n <= N1), |y_n|/|y_k| <= M_y (tail n, any k).
  bool satisfies_amplitude_bounds(const Real& ell, const Real& m_y) const {
    for (std::size_t i = 0; i < n1; ++i) {
      Real a = abs(amplitudes[i]);
      if (a * ell < 1 || a > ell) return false;
    }
    for (std::size_t i = n1; i < n1 + n2; ++i)
      for (std::size_t k = 0; k < n1 + n2; ++k) {
        if (amplitudes[k].is_zero()) continue;
        if (abs(amplitudes[i]) > m_y * abs(amplitudes[k])) return false;
      }
    return true;
  }

  // phi_n = e^(-lambda_n delta) for every eigenvalue.
  RealVec nodes() const {
    RealVec phi;
    phi.reserve(lambdas.size());
    const prec_t p = prec();
    for (const auto& l : lambdas) phi.push_back(exp(-(l.with_prec(p) * delta)));
    return phi;
  }

  SpectralModel with_epsilon(const Real& e) const {
    SpectralModel m = *this;
    m.epsilon = e.with_prec(prec());
    return m;
  }
  // Same data carried at `p` bits.
  SpectralModel at_prec(prec_t p) const {
    SpectralModel m = *this;
    m.lambdas = expfit::with_prec(lambdas, p);
    m.amplitudes = expfit::with_prec(amplitudes, p);
    m.epsilon = epsilon.with_prec(p);
    m.delta = delta.with_prec(p);
    return m;
  }
};

struct MeasurementTrace {
  enum class Source { Synthetic, PdePoint, PdeIntegral };
  Real delta;
  RealVec samples;  // y(k delta), k = 0..len-1
  Source source = Source::Synthetic;
};

inline const char* source_name(MeasurementTrace::Source s) {
  switch (s) {
    case MeasurementTrace::Source::Synthetic: return "synthetic";
    case MeasurementTrace::Source::PdePoint: return "pde-point";
    case MeasurementTrace::Source::PdeIntegral: return "pde-integral";
  }
  return "synthetic";
}

struct GrowthBounds {
  Real upsilon;  // min over pairs of (lambda_m - lambda_n) / (m^2 - n^2)
  Real Upsilon;  // max over pairs
};

// lambda_n = c n^p, n = 1..count.
inline RealVec powerlaw_eigenvalues(const Real& c, const Real& p, std::size_t count) {
  if (c <= 0 || p <= 0) fail(Errc::InvalidArgument, "powerlaw_eigenvalues: c and p must be positive");
  const prec_t pr = std::max(c.prec(), p.prec());
  RealVec out;
  for (std::size_t n = 1; n <= count; ++n) out.push_back(c * pow(Real(static_cast<long>(n), pr), p));
  return out;
}

// Model with lambda_n = c n^p and constant amplitude.
inline SpectralModel powerlaw_model(double c, double p, std::size_t n1, std::size_t n2, const Real& epsilon,
                                    const Real& delta, prec_t prec, long amplitude = 1) {
  SpectralModel m;
  m.lambdas = powerlaw_eigenvalues(Real(c, prec), Real(p, prec), n1 + n2);
  m.amplitudes = RealVec(n1 + n2, Real(amplitude, prec));
  m.n1 = n1;
  m.n2 = n2;
  m.epsilon = epsilon.with_prec(prec);
  m.delta = delta.with_prec(prec);
  m.validate();
  return m;
}

inline GrowthBounds estimate_growth_bounds(const RealVec& lambdas) {
  const std::size_t count = std::min<std::size_t>(lambdas.size(), 200);
  if (count < 2) fail(Errc::InvalidArgument, "estimate_growth_bounds: need >= 2 eigenvalues");
  const prec_t p = max_prec(lambdas);
  GrowthBounds g{Real(p), Real(p)};
  bool first = true;
  for (std::size_t n = 0; n < count; ++n)
    for (std::size_t m = n + 1; m < count; ++m) {
      long mm = static_cast<long>(m + 1), nn = static_cast<long>(n + 1);
      Real r = (lambdas[m] - lambdas[n]) / (mm * mm - nn * nn);
      if (first || r < g.upsilon) g.upsilon = r;
      if (first || r > g.Upsilon) g.Upsilon = r;
      first = false;
    }
  return g;
}

// samples[k] = sum_{n<=N1} y_n phi_n^k + eps sum_{n>N1} y_n phi_n^k, k = 0..2N1-1.
inline MeasurementTrace synthesize_trace(const SpectralModel& model) {
  model.validate();
  const prec_t p = model.prec();
  const std::size_t len = 2 * model.n1;
  RealVec phi = model.nodes();
  MeasurementTrace tr{model.delta.with_prec(p), zeros(len, p), MeasurementTrace::Source::Synthetic};
  RealVec tail = zeros(len, p);
  for (std::size_t n = 0; n < phi.size(); ++n) {
    RealVec& dst = n < model.n1 ? tr.samples : tail;
    Real term = model.amplitudes[n].with_prec(p);
    for (std::size_t k = 0; k < len; ++k) {
      dst[k] += term;
      term *= phi[n];
    }
  }
  if (!model.epsilon.is_zero())
    for (std::size_t k = 0; k < len; ++k) tr.samples[k].add_mul(model.epsilon, tail[k]);
  return tr;
}

// --- Shooting on y'' = -(lambda + q(x)) y, y(0)=0, y'(0)=1, x in [0,1].
// This is the Dirichlet eigenproblem of A = -d^2/dx^2 - q.

inline constexpr int kShootSteps = 2000;

// q sampled at x = j h / 2, j = 0..2*kShootSteps, h = 1/kShootSteps.
struct ShootingGrid {
  RealVec q;
  prec_t prec = kDefaultPrec;

  static ShootingGrid from(const Potential& pot, prec_t p) {
    ShootingGrid g;
    g.prec = p;
    g.q.reserve(2 * kShootSteps + 1);
    for (long j = 0; j <= 2 * kShootSteps; ++j) g.q.push_back(pot(Real(j, p) / (2 * kShootSteps)));
    return g;
  }
  Real max_q() const {
    Real m = q.front();
    for (const auto& v : q) m = max(m, v);
    return m;
  }
  ShootingGrid at_prec(prec_t p) const {
    ShootingGrid g;
    g.prec = p;
    g.q = with_prec(q, p);
    return g;
  }
};

// cos(2 pi k x_j) on the shooting half-step grid, for fast repeated Fourier potentials.
struct FourierTable {
  std::vector<RealVec> basis;  // basis[k][j]
  prec_t prec = kDefaultPrec;

  FourierTable(std::size_t terms, prec_t p) : prec(p) {
    Real two_pi = 2 * pi(p);
    for (std::size_t k = 0; k < terms; ++k) {
      RealVec col;
      col.reserve(2 * kShootSteps + 1);
      for (long j = 0; j <= 2 * kShootSteps; ++j)
        col.push_back(cos(two_pi * static_cast<long>(k) * Real(j, p) / (2 * kShootSteps)));
      basis.push_back(std::move(col));
    }
  }
  ShootingGrid grid(const RealVec& coeffs) const {
    if (coeffs.size() > basis.size()) fail(Errc::InvalidArgument, "FourierTable: too many coefficients");
    ShootingGrid g;
    g.prec = prec;
    g.q = zeros(2 * kShootSteps + 1, prec);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      if (coeffs[k].is_zero()) continue;
      for (std::size_t j = 0; j < g.q.size(); ++j) g.q[j].add_mul(coeffs[k], basis[k][j]);
    }
    return g;
  }
};

// y(1; lambda) by classical RK4 with fixed step 1/kShootSteps.
inline Real shoot_y1(const ShootingGrid& g, const Real& lambda) {
  const prec_t p = std::max(g.prec, lambda.prec());
  const Real h = Real(1L, p) / kShootSteps;
  const Real h2 = h / 2, h6 = h / 6;
  Real y(p), v(1L, p);
  // Scratch values; the loop body allocates nothing.
  Real w0(p), wm(p), w1(p), k1v(p), y2(p), k2y(p), k2v(p), y3(p), k3y(p), k3v(p), y4(p), k4y(p), k4v(p);
  Real sy(p), sv(p);
  mpfr_add(w0.raw(), lambda.raw(), g.q[0].raw(), kRnd);
  for (int i = 0; i < kShootSteps; ++i) {
    mpfr_add(wm.raw(), lambda.raw(), g.q[2 * i + 1].raw(), kRnd);
    mpfr_add(w1.raw(), lambda.raw(), g.q[2 * i + 2].raw(), kRnd);
    mpfr_mul(k1v.raw(), w0.raw(), y.raw(), kRnd);
    mpfr_neg(k1v.raw(), k1v.raw(), kRnd);
    mpfr_fma(y2.raw(), h2.raw(), v.raw(), y.raw(), kRnd);
    mpfr_fma(k2y.raw(), h2.raw(), k1v.raw(), v.raw(), kRnd);
    mpfr_mul(k2v.raw(), wm.raw(), y2.raw(), kRnd);
    mpfr_neg(k2v.raw(), k2v.raw(), kRnd);
    mpfr_fma(y3.raw(), h2.raw(), k2y.raw(), y.raw(), kRnd);
    mpfr_fma(k3y.raw(), h2.raw(), k2v.raw(), v.raw(), kRnd);
    mpfr_mul(k3v.raw(), wm.raw(), y3.raw(), kRnd);
    mpfr_neg(k3v.raw(), k3v.raw(), kRnd);
    mpfr_fma(y4.raw(), h.raw(), k3y.raw(), y.raw(), kRnd);
    mpfr_fma(k4y.raw(), h.raw(), k3v.raw(), v.raw(), kRnd);
    mpfr_mul(k4v.raw(), w1.raw(), y4.raw(), kRnd);
    mpfr_neg(k4v.raw(), k4v.raw(), kRnd);
    // sy = k1y + 2 (k2y + k3y) + k4y with k1y = v.
    mpfr_add(sy.raw(), k2y.raw(), k3y.raw(), kRnd);
    mpfr_mul_2ui(sy.raw(), sy.raw(), 1, kRnd);
    mpfr_add(sy.raw(), sy.raw(), v.raw(), kRnd);
    mpfr_add(sy.raw(), sy.raw(), k4y.raw(), kRnd);
    mpfr_add(sv.raw(), k2v.raw(), k3v.raw(), kRnd);
    mpfr_mul_2ui(sv.raw(), sv.raw(), 1, kRnd);
    mpfr_add(sv.raw(), sv.raw(), k1v.raw(), kRnd);
    mpfr_add(sv.raw(), sv.raw(), k4v.raw(), kRnd);
    mpfr_fma(y.raw(), h6.raw(), sy.raw(), y.raw(), kRnd);
    mpfr_fma(v.raw(), h6.raw(), sv.raw(), v.raw(), kRnd);
    mpfr_swap(w0.raw(), w1.raw());
  }
  return y;
}

// First `count` Dirichlet eigenvalues of -d^2/dx^2 - q by shooting: sign changes
// of y(1; .) on a scan grid, then bisection to |y(1)| <= tol.
inline RealVec shooting_eigenvalues(const Potential& pot, std::size_t count, const Real& tol, prec_t prec) {
  if (tol <= 0) fail(Errc::InvalidArgument, "shooting_eigenvalues: tol must be positive");
  const ShootingGrid hi = ShootingGrid::from(pot, prec);
  const ShootingGrid lo = hi.at_prec(64);
  const double pi2 = M_PI * M_PI;
  // No eigenvalue lies below pi^2 - max q.
  const double lam_lo = pi2 - hi.max_q().to_double() - 1.0;
  const double ceiling = 1.5 * pi2 * static_cast<double>((count + 2) * (count + 2));
  const double ds = M_PI / 8;
  RealVec out;
  double s_prev = 0, y_prev = shoot_y1(lo, Real(lam_lo, 64)).to_double();
  for (double s = ds; out.size() < count; s += ds) {
    double lam = lam_lo + s * s;
    if (lam > ceiling) break;
    double y = shoot_y1(lo, Real(lam, 64)).to_double();
    if ((y_prev < 0) != (y < 0)) {
      Real a(lam_lo + s_prev * s_prev, prec), b(lam, prec);
      Real ya = shoot_y1(hi, a);
      Real yb = shoot_y1(hi, b);
      if (ya.sign() * yb.sign() > 0) fail(Errc::BracketingFailed, "scan bracket lost at working precision");
      Real mid(prec);
      for (int it = 0; it < 4 * static_cast<int>(prec); ++it) {
        mid = ldexp(a + b, -1);
        Real ym = shoot_y1(hi, mid);
        if (abs(ym) <= tol) break;
        if (ym.sign() == ya.sign()) {
          a = mid;
          ya = std::move(ym);
        } else {
          b = mid;
        }
        if (abs(b - a) <= ldexp(abs(mid), -static_cast<long>(prec) + 4)) break;
      }
      out.push_back(mid);
    }
    s_prev = s;
    y_prev = y;
  }
  if (out.size() < count)
    fail(Errc::BracketingFailed,
         "found " + std::to_string(out.size()) + " of " + std::to_string(count) + " eigenvalues below the ceiling");
  return out;
}

}  // namespace expfit
