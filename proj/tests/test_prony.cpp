#include <random>

#include "expfit/prony.hpp"
#include "support.hpp"

using namespace expfit;
using namespace expfit::testing;

namespace {

RealVec vec(std::initializer_list<long> v, prec_t p) {
  RealVec out;
  for (long x : v) out.emplace_back(x, p);
  return out;
}

// Coefficients of the Lagrange basis polynomial L_j for the given nodes.
RealVec lagrange_coeffs(const RealVec& nodes, std::size_t j) {
  RealVec roots;
  Real denom(1L, nodes[j].prec());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i == j) continue;
    roots.push_back(nodes[i]);
    denom *= nodes[j] - nodes[i];
  }
  Poly l = poly_from_roots(roots, nodes[j].prec());
  for (auto& c : l.coeffs) c /= denom;
  return l.coeffs;
}

// sum_n a_n e^(-l_n k delta), k = 0..len-1, by direct evaluation.
RealVec expsum(const RealVec& l, const RealVec& a, const Real& delta, std::size_t len) {
  RealVec out;
  for (std::size_t k = 0; k < len; ++k) {
    Real s(delta.prec());
    for (std::size_t n = 0; n < l.size(); ++n) s += a[n] * exp(-l[n] * delta * static_cast<long>(k));
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(BuildHankel, Shapes) {
  const prec_t p = 64;
  RealMatrix h = build_hankel(vec({1, 2, 3, 4}, p), 2);
  EXPECT_EQ(h(0, 0), Real(1L, p));
  EXPECT_EQ(h(0, 1), Real(2L, p));
  EXPECT_EQ(h(1, 0), Real(2L, p));
  EXPECT_EQ(h(1, 1), Real(3L, p));
  RealMatrix h1 = build_hankel(vec({7, 8}, p), 1);
  EXPECT_EQ(h1.rows(), 1u);
  EXPECT_EQ(h1(0, 0), Real(7L, p));
  EXPECT_THROW(build_hankel(vec({1, 2, 3}, p), 2), Error);
}

TEST(BuildHankel, NoiselessRankThree) {
  const prec_t p = 256;
  RealVec samples = expsum(vec({1, 4, 9}, p), vec({1, 1, 1}, p), Real("0.3", p), 8);
  RealVec head(samples.begin(), samples.begin() + 6);
  SVD s3 = svd_jacobi(build_hankel(head, 3));
  EXPECT_GT(s3.sigma[2], ldexp(s3.sigma[0], -40));
  SVD s4 = svd_jacobi(build_hankel(samples, 4));
  EXPECT_GT(s4.sigma[2], ldexp(s4.sigma[0], -40));
  EXPECT_LT(s4.sigma[3], ldexp(s4.sigma[0], -200));
}

TEST(ClassicalProny, SingleNode) {
  const prec_t p = 128;
  PronyResult r = classical_prony(vec({2, 1}, p), 1, Real(1L, p));
  ASSERT_EQ(r.n_recovered, 1u);
  EXPECT_TRUE(rel_close(r.nodes[0], Real("0.5", p), -35));
  EXPECT_TRUE(rel_close(r.amplitudes[0], Real(2L, p), -35));
  EXPECT_TRUE(rel_close(r.exponents[0], log(Real(2L, p)), -35));
}

TEST(ClassicalProny, TwoNodesAt9000Bits) {
  const prec_t p = 9000;
  SpectralModel m = powerlaw_model(1, 2, 2, 0, Real(p), Real(1L, p), p);
  PronyResult r = classical_prony(synthesize_trace(m).samples, 2, m.delta);
  ASSERT_EQ(r.n_recovered, 2u);
  EXPECT_TRUE(rel_close(r.exponents[0], Real(1L, p), -2600));
  EXPECT_TRUE(rel_close(r.exponents[1], Real(4L, p), -2600));
  EXPECT_EQ(r.diagnostics.discarded_roots, 0u);
}

TEST(ClassicalProny, RoundTripRandomModels) {
  std::mt19937_64 rng(11);
  for (std::size_t n1 : {3u, 6u, 10u}) {
    const prec_t p = 64 * n1 + 256;
    SpectralModel m;
    m.n1 = n1;
    m.delta = uniform(rng, 0.05, 0.5, p);
    Real acc(p);
    for (std::size_t i = 0; i < n1; ++i) {
      acc += uniform(rng, 0.5, 3.0, p);
      m.lambdas.push_back(acc);
      m.amplitudes.push_back(uniform(rng, 0.5, 2.0, p));
    }
    m.epsilon = Real(p);
    PronyResult r = classical_prony(synthesize_trace(m).samples, n1, m.delta);
    ASSERT_EQ(r.n_recovered, n1);
    const double bound = -log10_pow2(p / 4.0);
    for (std::size_t i = 0; i < n1; ++i) {
      EXPECT_TRUE(rel_close(r.exponents[i], m.lambdas[i], -bound)) << n1 << " " << i;
      EXPECT_TRUE(rel_close(r.amplitudes[i], m.amplitudes[i], -bound)) << n1 << " " << i;
    }
    for (std::size_t i = 1; i < n1; ++i) EXPECT_GT(r.exponents[i], r.exponents[i - 1]);
  }
}

TEST(ClassicalProny, SingularHankel) {
  const prec_t p = 128;
  EXPECT_THROW(
      {
        try {
          classical_prony(vec({1, 1, 1, 1}, p), 2, Real(1L, p));
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), Errc::SingularHankel);
          throw;
        }
      },
      Error);
}

TEST(HomogeneousProny, SingleNodeDeterminant) {
  const prec_t p = 128;
  Poly q = homogeneous_prony_poly(vec({2, 1}, p), 1);
  // det [[1, z], [2, 1]] = 1 - 2z.
  ASSERT_EQ(q.coeffs.size(), 2u);
  EXPECT_EQ(q.coeffs[0], Real(1L, p));
  EXPECT_EQ(q.coeffs[1], Real(-2L, p));
  ComplexVec r = poly_roots(q);
  EXPECT_TRUE(rel_close(r[0].re, Real("0.5", p), -35));
}

TEST(HomogeneousProny, MatchesClassicalRoots) {
  const prec_t p = 512;
  for (std::size_t n1 : {2u, 5u}) {
    SpectralModel m = powerlaw_model(1, 2, n1, 0, Real(p), Real("0.2", p), p);
    RealVec s = synthesize_trace(m).samples;
    PronyResult cl = classical_prony(s, n1, m.delta);
    ComplexVec hr = poly_roots(homogeneous_prony_poly(s, n1));
    RealVec h;
    for (const auto& z : hr) {
      EXPECT_LE(abs(z.im), ldexp(abs(z.re), -static_cast<long>(p / 3)));
      h.push_back(z.re);
    }
    std::sort(h.begin(), h.end(), [](const Real& a, const Real& b) { return a > b; });
    ASSERT_EQ(h.size(), cl.nodes.size());
    for (std::size_t i = 0; i < n1; ++i) EXPECT_TRUE(rel_close(h[i], cl.nodes[i], log10_pow2(p / 3.0)));
  }
}

TEST(HomogeneousProny, RankOneSequenceIsDegenerate) {
  const prec_t p = 256;
  Real phi("0.3", p);
  RealVec s;
  for (long k = 0; k < 4; ++k) s.push_back(pow(phi, k));
  try {
    homogeneous_prony_poly(s, 2);
    FAIL() << "expected DegenerateAllZero";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateAllZero);
  }
}

TEST(FilteredProny, NoiselessThreeModes) {
  const prec_t p = 512;
  SpectralModel m = powerlaw_model(1, 2, 3, 0, Real(p), Real("0.2", p), p);
  PronyResult r = filtered_prony(synthesize_trace(m).samples, 3, m.delta, Real("1e-6", p));
  ASSERT_EQ(r.n_recovered, 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(rel_close(r.exponents[i], m.lambdas[i], -100));
  EXPECT_EQ(r.diagnostics.discarded_roots, 0u);
}

TEST(FilteredProny, DropsInjectedConjugatePair) {
  const prec_t p = 512;
  SpectralModel m = powerlaw_model(1, 2, 3, 0, Real(p), Real("0.2", p), p);
  RealVec s = expsum(m.lambdas, m.amplitudes, m.delta, 10);
  // Tiny damped oscillation: two extra complex-conjugate nodes.
  Real amp("1e-9", p), lam("2.5", p), w(1L, p);
  for (std::size_t k = 0; k < s.size(); ++k) {
    Real t = m.delta * static_cast<long>(k);
    s[k] += amp * exp(-lam * t) * cos(w * static_cast<long>(k));
  }
  PronyResult r = filtered_prony(s, 5, m.delta, Real("1e-6", p));
  EXPECT_EQ(r.n_recovered, 3u);
  EXPECT_TRUE(r.diagnostics.complex_roots_retained);
  EXPECT_EQ(r.diagnostics.complex_roots.size(), 2u);
  for (std::size_t i = 0; i < r.n_recovered; ++i) EXPECT_TRUE(rel_close(r.exponents[i], m.lambdas[i], -100));
}

TEST(FilteredProny, AmplitudeThresholdDropsWeakMode) {
  const prec_t p = 512;
  SpectralModel m = powerlaw_model(1, 2, 3, 0, Real(p), Real("0.2", p), p);
  m.amplitudes[1] = Real("1e-9", p);
  PronyResult r = filtered_prony(synthesize_trace(m).samples, 3, m.delta, Real("1e-6", p));
  ASSERT_EQ(r.n_recovered, 2u);
  EXPECT_TRUE(rel_close(r.exponents[0], m.lambdas[0], -100));
  EXPECT_TRUE(rel_close(r.exponents[1], m.lambdas[2], -100));
  EXPECT_EQ(r.diagnostics.discarded_roots, 1u);
}

TEST(RecoverAmplitudes, Examples) {
  const prec_t p = 256;
  RealVec a = recover_amplitudes({Real("0.5", p)}, vec({2, 1}, p));
  EXPECT_TRUE(rel_close(a[0], Real(2L, p), -70));
  RealVec nodes = {exp(Real(-1L, p)), exp(Real(-4L, p))};
  RealVec s;
  for (long k = 0; k < 4; ++k) s.push_back(3 * pow(nodes[0], k) + 5 * pow(nodes[1], k));
  RealVec b = recover_amplitudes(nodes, s);
  EXPECT_TRUE(rel_close(b[0], Real(3L, p), -70));
  EXPECT_TRUE(rel_close(b[1], Real(5L, p), -70));
  EXPECT_THROW(recover_amplitudes({Real("0.5", p), Real("0.5", p)}, vec({1, 2}, p)), Error);
}

TEST(RecoverAmplitudes, SquareMatchesLagrangeInverse) {
  const prec_t p = 512;
  std::mt19937_64 rng(5);
  RealVec nodes, s;
  for (int i = 0; i < 5; ++i) nodes.push_back(uniform(rng, 0.01, 0.99, p));
  for (int i = 0; i < 5; ++i) s.push_back(uniform(rng, -1.0, 1.0, p));
  RealVec y = recover_amplitudes(nodes, s);
  for (std::size_t j = 0; j < 5; ++j) {
    RealVec c = lagrange_coeffs(nodes, j);
    Real ref(p);
    for (std::size_t k = 0; k < 5; ++k) ref.add_mul(c[k], s[k]);
    EXPECT_TRUE(rel_close(y[j], ref, log10_pow2(p / 3.0))) << j;
  }
}

TEST(NodesToExponents, Examples) {
  const prec_t p = 256;
  RealVec l = nodes_to_exponents({exp(Real(-2L, p)), exp(Real("-0.4", p)), Real(1L, p)}, Real("0.1", p) * 10);
  EXPECT_TRUE(rel_close(l[0], Real(2L, p), -70));
  RealVec l2 = nodes_to_exponents({exp(Real("-0.4", p))}, Real("0.1", p));
  EXPECT_TRUE(rel_close(l2[0], Real(4L, p), -70));
  EXPECT_TRUE(l[2].is_zero());
  EXPECT_THROW(nodes_to_exponents({Real(p)}, Real(1L, p)), Error);
}

TEST(MatchExponents, GreedyNearest) {
  const prec_t p = 64;
  Matching m = match_exponents(vec({4, 1, 10, 9}, p), vec({1, 4, 9}, p));
  EXPECT_EQ(m.of_true[0], 1);
  EXPECT_EQ(m.of_true[1], 0);
  EXPECT_EQ(m.of_true[2], 3);
  EXPECT_EQ(m.spurious, 1u);
}
