#include <iostream>
#include <random>

#include "expfit/analysis.hpp"
#include "support.hpp"

using namespace expfit;
using namespace expfit::testing;

namespace {

// Li2(x) = sum x^k / k^2 for 0 <= x < 1.
Real dilog(const Real& x) {
  const prec_t p = x.prec();
  Real sum(p), pw = x;
  const Real tiny = ldexp(Real(1L, p), -static_cast<long>(p) - 8);
  for (long k = 1; pw > tiny; ++k) {
    sum += pw / (k * k);
    pw *= x;
  }
  return sum;
}

RealVec squares(std::size_t count, prec_t p) {
  RealVec v;
  for (std::size_t n = 1; n <= count; ++n) v.emplace_back(static_cast<long>(n * n), p);
  return v;
}

SpectralModel small_model(std::size_t n1, std::uint64_t seed, prec_t p) {
  std::mt19937_64 rng(seed);
  SpectralModel m;
  m.n1 = n1;
  m.n2 = 1;
  m.delta = Real("0.3", p);
  m.epsilon = Real("0.001", p);
  for (std::size_t n = 1; n <= n1 + 1; ++n) {
    m.lambdas.push_back(Real(static_cast<long>(n * n), p) + uniform(rng, 0.0, 0.5, p));
    m.amplitudes.push_back(uniform(rng, 0.5, 2.0, p));
  }
  return m;
}

}  // namespace

TEST(Scalars, PsiAndCubic) {
  EXPECT_EQ(psi(1, 3), 11);
  EXPECT_EQ(psi(3, 3), 0);
  EXPECT_EQ(psi(2, 5), 5 + 12 + 21);
  EXPECT_THROW(psi(0, 3), Error);
  const prec_t p = 128;
  EXPECT_TRUE(rel_close(eta_cubic_coefficient(Real("0.5", p)), Real(1L, p) / 12, -36));
  EXPECT_THROW(eta_cubic_coefficient(Real(1L, p)), Error);
  EXPECT_TRUE(rel_close(g_function(Real(1L, p)), -log(1 - exp(Real(-1L, p))), -36));
  EXPECT_THROW(g_function(Real(p)), Error);
}

TEST(Scalars, MonotoneShapes) {
  for (long n1 = 2; n1 <= 100; ++n1)
    for (long n = 1; n < n1; ++n) EXPECT_GT(psi(n, n1), psi(n + 1, n1));
  const prec_t p = 128;
  Real prev_g = g_function(Real("0.01", p));
  Real prev_G = calG(Real(1L, p), std::nullopt, Real("0.01", p));
  for (const char* x : {"0.1", "0.5", "1", "4", "20"}) {
    Real g = g_function(Real(x, p));
    Real G = calG(Real(1L, p), std::nullopt, Real(x, p));
    EXPECT_LT(g, prev_g) << x;
    EXPECT_LT(G, prev_G) << x;
    prev_g = g;
    prev_G = G;
  }
}

TEST(Scalars, PsiCubicLowerBoundPastOnset) {
  const prec_t p = 128;
  for (const char* e : {"0.3", "0.5", "0.7"}) {
    Real eta(e, p);
    long n0 = psi_bound_onset(eta, 200);
    ASSERT_LE(n0, 200) << e;
    Real a = eta_cubic_coefficient(eta);
    for (long n1 = n0; n1 <= 200; ++n1) {
      long n = floor(eta * n1).to_long();
      EXPECT_GE(Real(psi(n, n1), p), a * pow(Real(n1, p), 3)) << e << " " << n1;
    }
    std::cout << "onset eta=" << e << " N0=" << n0 << "\n";
  }
}

TEST(Scalars, PsiOnsetMatchesBruteForce) {
  const prec_t p = 128;
  for (const char* e : {"0.25", "0.5", "0.75"}) {
    Real eta(e, p);
    double a = 1.0 / 6 + std::pow(std::stod(e), 3) / 3 - std::pow(std::stod(e), 2) / 2;
    long expect = 41;
    for (long n1 = 40; n1 >= 1; --n1) {
      long n = static_cast<long>(std::floor(std::stod(e) * n1));
      if (n < 1 || static_cast<double>(psi(n, n1)) < a * n1 * n1 * n1) break;
      expect = n1;
    }
    EXPECT_EQ(psi_bound_onset(eta, 40), expect) << e;
  }
}

TEST(CalG, MatchesDilogarithm) {
  const prec_t p = 256;
  const Real zero(p), one(1L, p), two(2L, p);
  for (const char* z : {"0.05", "0.7", "3", "40"}) {
    Real zeta(z, p);
    EXPECT_TRUE(rel_close(calG(zero, std::nullopt, zeta), sqr(pi(p)) / (6 * zeta), -70)) << z;
    EXPECT_TRUE(rel_close(calG(one, std::nullopt, zeta), dilog(exp(-zeta)) / zeta, -70)) << z;
    Real g12 = (dilog(exp(-zeta)) - dilog(exp(-2 * zeta))) / zeta;
    EXPECT_TRUE(rel_close(calG(one, two, zeta), g12, -70)) << z;
  }
  EXPECT_THROW(calG(two, one, one), Error);
  EXPECT_THROW(calG(zero, std::nullopt, zero), Error);
}

TEST(Theta, SandwichBoundsHold) {
  const prec_t p = 192;
  for (const char* d : {"0.1", "1"}) {
    for (std::size_t n1 = 1; n1 <= 20; ++n1) {
      AnalysisContext ctx = make_context(squares(n1 + 1, p), Real(d, p), n1);
      for (std::size_t n = 1; n <= n1; ++n) {
        ThetaTriple t = theta_sums(ctx, n);
        ThetaBounds b = theta_bounds(ctx, n);
        EXPECT_TRUE(b.theta1.contains(t.theta1)) << d << " " << n1 << " " << n;
        EXPECT_EQ(b.theta2.has_value(), n > 1);
        EXPECT_EQ(b.theta3.has_value(), n < n1);
        if (b.theta2) EXPECT_TRUE(b.theta2->contains(t.theta2)) << d << " " << n1 << " " << n;
        if (b.theta3) EXPECT_TRUE(b.theta3->contains(t.theta3)) << d << " " << n1 << " " << n;
      }
    }
  }
}

TEST(Theta, LSquaredIdentity) {
  const prec_t p = 256;
  for (const char* d : {"0.1", "0.5"}) {
    for (std::size_t n1 : {1u, 2u, 5u, 9u}) {
      AnalysisContext ctx = make_context(squares(n1 + 1, p), Real(d, p), n1);
      for (std::size_t n = 1; n <= n1; ++n) {
        TwoWay w = lsquared_identity(ctx, n);
        EXPECT_TRUE(rel_close(w.formula, w.direct, -60)) << d << " " << n1 << " " << n;
      }
    }
  }
}

TEST(Theta, SeparationTau) {
  const prec_t p = 128;
  EXPECT_TRUE(abs_close(separation_tau(Real("0.1", p), Real(1L, p)), Real("0.086394", p), -6));
  EXPECT_TRUE(rel_close(separation_tau(Real(10L, p), Real(10L, p)), Real(1L, p) / 3, -30));
  // Relative node gaps for lambda = n^2, delta = 0.1, N1 = 30 respect 2 tau.
  AnalysisContext ctx = make_context(squares(31, p), Real("0.1", p), 30);
  for (std::size_t n = 0; n < 30; ++n)
    for (std::size_t j = 0; j < 30; ++j) {
      if (j == n) continue;
      Real pn = exp(-ctx.delta * ctx.lambdas[n]), pj = exp(-ctx.delta * ctx.lambdas[j]);
      EXPECT_GE(abs(pj - pn) / pn, 2 * ctx.tau);
    }
  Real t = separation_tau(Real("0.2", p), Real("1.5", p));
  EXPECT_TRUE(rel_close(t, (1 - exp(Real("-0.9", p))) / 3, -36));
  EXPECT_THROW(separation_tau(Real(p), Real(1L, p)), Error);
}

TEST(Symmetric, MeansMatchSubsetEnumeration) {
  const prec_t p = 128;
  std::mt19937_64 rng(11);
  RealVec v;
  for (int i = 0; i < 7; ++i) v.push_back(uniform(rng, 0.1, 3.0, p));
  for (std::size_t k = 1; k <= v.size(); ++k) {
    Real brute(p);
    long count = 0;
    for (unsigned mask = 0; mask < (1u << v.size()); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
      Real prod(1L, p);
      for (std::size_t i = 0; i < v.size(); ++i)
        if (mask & (1u << i)) prod *= v[i];
      brute += prod;
      ++count;
    }
    SymmetricMean s = symmetric_means(v, k);
    EXPECT_TRUE(rel_close(s.s_k, brute, -34)) << k;
    EXPECT_TRUE(rel_close(s.m_k, brute / count, -34)) << k;
  }
  EXPECT_THROW(symmetric_means(v, 0), Error);
  EXPECT_THROW(symmetric_means(v, 8), Error);
}

TEST(Symmetric, Maclaurin) {
  const prec_t p = 128;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    RealVec v;
    for (int i = 0; i < 6; ++i) v.push_back(uniform(rng, 0.0, 10.0, p));
    EXPECT_TRUE(maclaurin_check(v));
  }
  std::uniform_int_distribution<int> len(1, 12);
  for (int trial = 0; trial < 1000; ++trial) {
    RealVec v;
    for (int i = len(rng); i > 0; --i) v.push_back(uniform(rng, 0.0, 5.0, p));
    EXPECT_TRUE(maclaurin_check(v)) << trial;
  }
  RealVec equal(5, Real("2.5", p));
  EXPECT_TRUE(maclaurin_check(equal));
  EXPECT_THROW(maclaurin_check({Real(1L, p), Real(-1L, p)}), Error);
}

TEST(Erfi, MatchesQuadratureAndReference) {
  const prec_t p = 192;
  GaussLegendre gl = gauss_legendre(64, p);
  for (const char* xs : {"0.3", "1", "2.5", "6"}) {
    Real x(xs, p);
    Real q = 2 * integrate_gl([](const Real& t) { return exp(sqr(t)); }, Real(p), x, 8, gl) / sqrt(pi(p));
    EXPECT_TRUE(rel_close(erfi(x), q, -50)) << xs;
  }
  // Two-term asymptotic value; its truncation error is O(1e-4).
  EXPECT_TRUE(abs_close(exp(Real(-100L, p)) * erfi(Real(10L, p)), Real("0.056701", p), -4));
  EXPECT_TRUE(erfi(Real(p)).is_zero());
}

TEST(Prony, PbarTwoWays) {
  const prec_t p = 256;
  for (std::size_t n1 = 1; n1 <= 6; ++n1) {
    SpectralModel m = small_model(n1, 20 + n1, p);
    for (const char* z : {"0.37", "-1.2"}) {
      PbarTwoWays w = pbar_two_ways(m, Real(z, p));
      EXPECT_TRUE(rel_close(w.det_form, w.product_form, -50)) << n1 << " " << z;
    }
  }
  // N1 = 1 by hand: m1 - m0 z = y1 (phi1 - z).
  SpectralModel one = small_model(1, 3, p);
  Real phi1 = one.nodes()[0], z("0.6", p);
  EXPECT_TRUE(rel_close(pbar_two_ways(one, z).det_form, one.amplitudes[0] * (phi1 - z), -60));
  SpectralModel three = small_model(3, 4, p);
  PbarTwoWays at_root = pbar_two_ways(three, three.nodes()[0]);
  EXPECT_TRUE(abs_close(at_root.det_form, Real(p), -60));
  EXPECT_TRUE(at_root.product_form.is_zero());
  SpectralModel big = small_model(9, 1, p);
  EXPECT_THROW(pbar_two_ways(big, Real(p)), Error);
}

TEST(Prony, DiscrepancyFormula) {
  const prec_t p = 256;
  for (std::size_t n1 = 2; n1 <= 4; ++n1) {
    SpectralModel m = small_model(n1, 40 + n1, p);
    for (const char* z : {"0.2", "0.9", "-0.5"}) {
      Discrepancy d = discrepancy_formula(m, Real(z, p));
      EXPECT_TRUE(rel_close(d.formula, d.oracle, -50)) << n1 << " " << z;
    }
  }
  EXPECT_THROW(discrepancy_formula(small_model(5, 1, p), Real(p)), Error);

  const prec_t hp = 512;
  SpectralModel ref = powerlaw_model(1, 2, 2, 1, Real("1e-3", hp), Real(1L, hp), hp);
  Discrepancy r = discrepancy_formula(ref, Real("0.2", hp));
  EXPECT_TRUE(rel_close(r.formula, r.oracle, -60));
  SpectralModel doubled = ref;
  doubled.epsilon = 2 * ref.epsilon;
  EXPECT_TRUE(rel_close(discrepancy_formula(doubled, Real("0.2", hp)).formula / r.formula, Real(2L, hp), -140));
  SpectralModel clean = ref;
  clean.epsilon = Real(hp);
  Discrepancy c = discrepancy_formula(clean, Real("0.2", hp));
  EXPECT_TRUE(c.formula.is_zero());
  EXPECT_TRUE(abs_close(c.oracle, Real(hp), -140));
  SpectralModel two_tail = small_model(3, 2, p);
  two_tail.n1 = 2;
  two_tail.n2 = 2;
  EXPECT_THROW(discrepancy_formula(two_tail, Real(p)), Error);
}

TEST(Prony, TailMatrixIsRankOneAndAdditive) {
  const prec_t p = 256;
  SpectralModel m = small_model(3, 9, p);
  RealMatrix d = tail_matrix(m);
  for (std::size_t j = 0; j <= m.n1; ++j) EXPECT_TRUE(d(0, j).is_zero());
  for (std::size_t i = 1; i + 1 <= m.n1; ++i)
    for (std::size_t j = 0; j + 1 <= m.n1; ++j) {
      Real minor = d(i, j) * d(i + 1, j + 1) - d(i, j + 1) * d(i + 1, j);
      EXPECT_TRUE(abs_close(minor, Real(p), -60));
    }
  // The perturbed Prony matrix equals the unperturbed one plus epsilon D.
  Real z("0.45", p);
  PbarTwoWays base = pbar_two_ways(m, z);
  Discrepancy disc = discrepancy_formula(m, z);
  RealMatrix a(m.n1 + 1, m.n1 + 1, p);
  RealVec phi = m.nodes();
  for (std::size_t j = 0; j <= m.n1; ++j) a(0, j) = pow(z, static_cast<long>(j));
  for (std::size_t i = 1; i <= m.n1; ++i)
    for (std::size_t j = 0; j <= m.n1; ++j) {
      Real s(p);
      for (std::size_t k = 0; k < m.n1; ++k) s += m.amplitudes[k] * pow(phi[k], static_cast<long>(i - 1 + j));
      a(i, j) = s + m.epsilon * d(i, j);
    }
  EXPECT_TRUE(rel_close(det_bareiss(a) - base.det_form, disc.oracle, -50));
}

TEST(Adjugate, FirstOrderIsClassicalAdjugate) {
  const prec_t p = 128;
  std::mt19937_64 rng(13);
  RealMatrix l(4, 4, p);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) l(i, j) = uniform(rng, -1.0, 1.0, p);
  Real det = det_bareiss(l);
  RealMatrix adj = higher_order_adjugate(l, 1);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      Real s(p);
      for (std::size_t k = 0; k < 4; ++k) s += l(i, k) * adj(k, j);
      EXPECT_TRUE(abs_close(s, i == j ? det : Real(p), -34));
    }
  RealMatrix a0 = higher_order_adjugate(l, 0);
  EXPECT_TRUE(rel_close(a0(0, 0), det, -34));
  RealMatrix a4 = higher_order_adjugate(l, 4);
  EXPECT_EQ(a4(0, 0), Real(1L, p));
  EXPECT_EQ(higher_order_adjugate(l, 2).rows(), 6u);
}

TEST(Adjugate, TailMatrixLowOrderAdjugatesVanish) {
  const prec_t p = 256;
  for (std::size_t n1 = 2; n1 <= 4; ++n1) {
    RealMatrix d = tail_matrix(small_model(n1, 60 + n1, p));
    for (std::size_t r = 0; r + 1 <= n1 - 1; ++r) {
      RealMatrix a = higher_order_adjugate(d, r);
      for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) EXPECT_TRUE(abs_close(a(i, j), Real(p), -60)) << n1 << " " << r;
    }
  }
}

TEST(Adjugate, VandermondeSymmetricIdentity) {
  const prec_t p = 192;
  std::mt19937_64 rng(17);
  RealVec chi;
  for (int i = 0; i < 5; ++i) chi.push_back(uniform(rng, -2.0, 2.0, p));
  for (std::size_t k = 1; k <= chi.size(); ++k) {
    TwoWay w = vandermonde_symmetric_identity(chi, k);
    EXPECT_TRUE(rel_close(w.direct, w.formula, -45)) << k;
  }
  EXPECT_THROW(vandermonde_symmetric_identity(chi, 0), Error);
}
