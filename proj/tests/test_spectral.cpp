#include "expfit/spectral.hpp"
#include "support.hpp"

using namespace expfit;
using namespace expfit::testing;

TEST(Powerlaw, Examples) {
  const prec_t p = 128;
  RealVec a = powerlaw_eigenvalues(Real(1L, p), Real(2L, p), 3);
  EXPECT_EQ(a[0], Real(1L, p));
  EXPECT_EQ(a[1], Real(4L, p));
  EXPECT_EQ(a[2], Real(9L, p));
  RealVec b = powerlaw_eigenvalues(Real(1L, p), Real(1L, p), 3);
  EXPECT_EQ(b[2], Real(3L, p));
  RealVec c = powerlaw_eigenvalues(Real(2L, p), Real(3L, p), 2);
  EXPECT_EQ(c[0], Real(2L, p));
  EXPECT_EQ(c[1], Real(16L, p));
  EXPECT_THROW(powerlaw_eigenvalues(Real(-1L, p), Real(2L, p), 3), Error);
}

TEST(GrowthBounds, QuadraticLaws) {
  const prec_t p = 128;
  GrowthBounds g1 = estimate_growth_bounds(powerlaw_eigenvalues(Real(1L, p), Real(2L, p), 40));
  EXPECT_EQ(g1.upsilon, Real(1L, p));
  EXPECT_EQ(g1.Upsilon, Real(1L, p));
  GrowthBounds g2 = estimate_growth_bounds(powerlaw_eigenvalues(Real(2L, p), Real(2L, p), 40));
  EXPECT_EQ(g2.upsilon, Real(2L, p));
  EXPECT_EQ(g2.Upsilon, Real(2L, p));
}

TEST(GrowthBounds, ShiftedQuadraticWithinOnePercentOfPiSquared) {
  const prec_t p = 128;
  RealVec l;
  Real pi2 = sqr(pi(p));
  for (long n = 1; n <= 30; ++n) l.push_back(pi2 * (n * n) - Real("0.75", p));
  GrowthBounds g = estimate_growth_bounds(l);
  // Direct scan over consecutive and distant pairs.
  Real lo = pi2, hi = pi2;
  for (std::size_t i = 0; i < l.size(); ++i)
    for (std::size_t j = i + 1; j < l.size(); ++j) {
      long a = static_cast<long>(i + 1), b = static_cast<long>(j + 1);
      Real r = (l[j] - l[i]) / (b * b - a * a);
      lo = min(lo, r);
      hi = max(hi, r);
    }
  EXPECT_TRUE(rel_close(g.upsilon, lo, -30));
  EXPECT_TRUE(rel_close(g.Upsilon, hi, -30));
  EXPECT_LE(abs(g.upsilon / pi2 - 1), Real("0.01", p));
  EXPECT_LE(abs(g.Upsilon / pi2 - 1), Real("0.01", p));
}

TEST(SynthesizeTrace, SingleMode) {
  const prec_t p = 256;
  SpectralModel m;
  m.lambdas = {Real(1L, p)};
  m.amplitudes = {Real(2L, p)};
  m.n1 = 1;
  m.epsilon = Real(p);
  m.delta = Real(1L, p);
  MeasurementTrace tr = synthesize_trace(m);
  ASSERT_EQ(tr.samples.size(), 2u);
  EXPECT_EQ(tr.samples[0], Real(2L, p));
  EXPECT_TRUE(rel_close(tr.samples[1], 2 * exp(Real(-1L, p)), -70));
}

TEST(SynthesizeTrace, NoiseOffEqualsHeadOnlyModel) {
  const prec_t p = 256;
  SpectralModel with_tail = powerlaw_model(1, 2, 3, 2, Real(p), Real("0.1", p), p);
  SpectralModel head = powerlaw_model(1, 2, 3, 0, Real(p), Real("0.1", p), p);
  MeasurementTrace a = synthesize_trace(with_tail), b = synthesize_trace(head);
  for (std::size_t k = 0; k < a.samples.size(); ++k) EXPECT_EQ(a.samples[k], b.samples[k]);
}

TEST(SynthesizeTrace, MatchesReversedPerTermSummation) {
  const prec_t p = 512;
  SpectralModel m = powerlaw_model(1, 2, 2, 1, Real("1e-6", p), Real("0.1", p), p);
  MeasurementTrace tr = synthesize_trace(m);
  for (long k = 0; k < 4; ++k) {
    // Oracle: closed-form powers e^(-lambda k delta), tail first.
    Real ref = Real("1e-6", p) * exp(Real(-9L * k, p) / 10);
    ref += exp(Real(-4L * k, p) / 10);
    ref += exp(Real(-1L * k, p) / 10);
    EXPECT_TRUE(abs_close(tr.samples[k], ref, log10_pow2(p / 2.0)));
  }
}

TEST(SynthesizeTrace, PositiveForPositiveAmplitudes) {
  const prec_t p = 256;
  SpectralModel m = powerlaw_model(1, 2, 8, 2, Real("0.1", p), Real("0.5", p), p);
  for (const auto& s : synthesize_trace(m).samples) EXPECT_GT(s, 0);
}

TEST(SpectralModel, ValidationAndAmplitudeBounds) {
  const prec_t p = 128;
  SpectralModel m = powerlaw_model(1, 2, 3, 1, Real(p), Real(1L, p), p);
  EXPECT_TRUE(m.satisfies_amplitude_bounds(Real(2L, p), Real(1L, p)));
  m.amplitudes[0] = Real(5L, p);
  EXPECT_FALSE(m.satisfies_amplitude_bounds(Real(2L, p), Real(1L, p)));
  m.lambdas[1] = m.lambdas[0];
  EXPECT_THROW(m.validate(), Error);
}

TEST(Shooting, ZeroPotentialGivesSquares) {
  const prec_t p = 256;
  Real tol("1e-12", p);
  RealVec l = shooting_eigenvalues(Potential::zero(p), 3, tol, p);
  Real pi2 = sqr(pi(p));
  for (long n = 1; n <= 3; ++n) EXPECT_TRUE(rel_close(l[n - 1], pi2 * (n * n), -9));
}

TEST(Shooting, ConstantPotentialShiftsSpectrum) {
  const prec_t p = 256;
  Real g("2.5", p);
  RealVec l = shooting_eigenvalues(Potential::constant(g), 3, Real("1e-12", p), p);
  Real pi2 = sqr(pi(p));
  for (long n = 1; n <= 3; ++n) EXPECT_TRUE(rel_close(l[n - 1], pi2 * (n * n) - g, -9));
}

TEST(Shooting, ZeroPotentialMatchesPowerLawUpToTen) {
  const prec_t p = 128;
  RealVec l = shooting_eigenvalues(Potential::zero(p), 10, Real("1e-12", p), p);
  RealVec ref = powerlaw_eigenvalues(sqr(pi(p)), Real(2L, p), 10);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_TRUE(rel_close(l[i], ref[i], -8)) << i;
  for (std::size_t i = 1; i < 10; ++i) EXPECT_GT(l[i], l[i - 1]);
}

TEST(Shooting, BoundaryValueOfKnownSolution) {
  const prec_t p = 256;
  ShootingGrid g = ShootingGrid::from(Potential::zero(p), p);
  // y = sin(2x)/2 for lambda = 4.
  EXPECT_TRUE(abs_close(shoot_y1(g, Real(4L, p)), sin(Real(2L, p)) / 2, -12));
  EXPECT_TRUE(abs_close(shoot_y1(g, Real(p)), Real(1L, p), -60));
}
