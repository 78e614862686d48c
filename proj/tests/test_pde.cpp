#include "expfit/pde.hpp"
#include "support.hpp"

using namespace expfit;
using namespace expfit::testing;

namespace {

SineSeries first_mode(prec_t p) { return SineSeries{{Real(1L, p)}}; }

Real max_grid_error(const ForwardSolution& sol, const Real& rate) {
  Real worst(sol.grid.prec());
  const Real pi_p = pi(sol.grid.prec());
  for (std::size_t j = 0; j < sol.t_nodes.size(); ++j)
    for (std::size_t i = 0; i < sol.x_nodes.size(); ++i) {
      Real exact = exp(rate * sol.t_nodes[j]) * sin(pi_p * sol.x_nodes[i]);
      worst = max(worst, abs(sol.grid(i, j) - exact));
    }
  return worst;
}

}  // namespace

TEST(Cheb, DifferentiatesPolynomialsAndSine) {
  const prec_t p = 512;
  ChebD2 cd = cheb_diff2(40, p);
  EXPECT_TRUE(cd.nodes.front().is_zero());
  EXPECT_EQ(cd.nodes.back(), Real(1L, p));
  RealVec ones(40, Real(1L, p)), sq, sn;
  for (const auto& x : cd.nodes) {
    sq.push_back(sqr(x));
    sn.push_back(sin(pi(p) * x));
  }
  RealVec d_one = cd.d2 * ones, d_sq = cd.d2 * sq, d_sn = cd.d2 * sn;
  for (std::size_t i = 1; i + 1 < 40; ++i) {
    EXPECT_TRUE(abs_close(d_one[i], Real(p), log10_pow2(p / 3.0)));
    EXPECT_TRUE(abs_close(d_sq[i], Real(2L, p), log10_pow2(p / 3.0)));
    EXPECT_TRUE(abs_close(d_sn[i], -sqr(pi(p)) * sn[i], -25));
  }
  EXPECT_THROW(cheb_diff2(3, p), Error);
}

TEST(Forward, ZeroPotentialMatchesAnalytic) {
  const prec_t p = 512;
  ForwardSolution sol = forward_solve(Potential::zero(p), first_mode(p), Real("0.1", p), 60, 11, p);
  EXPECT_EQ(sol.grid.rows(), 60u);
  EXPECT_EQ(sol.grid.cols(), 11u);
  EXPECT_TRUE(abs_close(max_grid_error(sol, -sqr(pi(p))), Real(p), -8));
  for (std::size_t i = 1; i + 1 < 60; ++i) EXPECT_EQ(sol.grid(i, 0), first_mode(p)(sol.x_nodes[i]));
  for (std::size_t j = 0; j < 11; ++j) {
    EXPECT_TRUE(sol.grid(0, j).is_zero());
    EXPECT_TRUE(sol.grid(59, j).is_zero());
  }
}

TEST(Forward, ConstantPotentialShiftsTheMode) {
  const prec_t p = 512;
  Real gamma("2.5", p);
  ForwardSolution sol = forward_solve(Potential::constant(gamma), first_mode(p), Real("0.2", p), 60, 5, p);
  EXPECT_TRUE(abs_close(max_grid_error(sol, gamma - sqr(pi(p))), Real(p), -8));
  EXPECT_THROW(forward_solve(Potential::zero(p), first_mode(p), Real(p), 20, 5, p), Error);
}

TEST(Forward, SemigroupAndEnergyDecay) {
  const prec_t p = 256;
  SineSeries f = default_initial_condition(60, p);
  Potential q = Potential::triangle(p);
  ForwardSolution two_steps = forward_solve(q, f, Real("0.02", p), 30, 3, p);
  ForwardSolution one_step = forward_solve(q, f, Real("0.02", p), 30, 2, p);
  for (std::size_t i = 0; i < 30; ++i)
    EXPECT_TRUE(abs_close(two_steps.grid(i, 2), one_step.grid(i, 1), log10_pow2(p / 4.0)));
  ForwardSolution sol = forward_solve(q, f, Real("0.3", p), 30, 16, p);
  Real prev(p);
  for (std::size_t j = 0; j < 16; ++j) {
    Real e(p);
    for (std::size_t i = 0; i < 30; ++i) e += sqr(sol.grid(i, j));
    if (j > 0) EXPECT_LT(e, prev) << j;
    prev = e;
  }
}

TEST(Forward, DefaultInitialCondition) {
  const prec_t p = 256;
  SineSeries f = default_initial_condition(60, p);
  ASSERT_EQ(f.coeffs.size(), 60u);
  EXPECT_TRUE(abs_close(f(Real(p)), Real(p), -70));
  EXPECT_TRUE(abs_close(f(Real(1L, p)), Real(p), -70));
  // At x = 1/2 only odd k contribute, with sign (-1)^((k-1)/2) (-1)^(k+1) = (-1)^((k-1)/2).
  Real direct(p);
  for (long k = 1; k <= 60; k += 2) direct += Real(((k - 1) / 2) % 2 == 0 ? 1L : -1L, p) / (k * k * k);
  EXPECT_TRUE(rel_close(f(Real("0.5", p)), direct, -70));
  // The tail past k = 60 is below 1/(2 * 60^2) < 1.4e-4.
  EXPECT_LT(1.0 / (2 * 60.0 * 60.0), 1.4e-4);
}

TEST(Spectrum, DiscreteOperatorMatchesShooting) {
  const prec_t p = 512;
  for (const Potential& q : {Potential::zero(p), random_fourier_potential(6, 1, p)}) {
    RealVec disc = discrete_eigenvalues(q, 60, 8, p);
    RealVec shoot = shooting_eigenvalues(q, 8, Real("1e-20", 128), 128);
    for (std::size_t k = 0; k < 8; ++k) EXPECT_TRUE(rel_close(disc[k], shoot[k], -6)) << k;
  }
  // The kink of the triangle at x = 1/2 limits collocation to algebraic convergence.
  RealVec disc = discrete_eigenvalues(Potential::triangle(p), 60, 8, p);
  RealVec shoot = shooting_eigenvalues(Potential::triangle(p), 8, Real("1e-20", 128), 128);
  for (std::size_t k = 0; k < 8; ++k) EXPECT_TRUE(rel_close(disc[k], shoot[k], -4)) << k;
  RealVec zero = discrete_eigenvalues(Potential::zero(p), 60, 8, p);
  for (std::size_t k = 0; k < 8; ++k)
    EXPECT_TRUE(rel_close(zero[k], sqr(pi(p)) * static_cast<long>((k + 1) * (k + 1)), -20)) << k;
}

TEST(Traces, PointTrace) {
  const prec_t p = 512;
  ForwardSolution sol = forward_solve(Potential::zero(p), first_mode(p), Real("0.1", p), 60, 11, p);
  Real x0("0.45", p);
  RealVec times = uniform_times(Real("0.01", p), 11);
  MeasurementTrace tr = point_trace(sol, x0, times);
  EXPECT_EQ(tr.source, MeasurementTrace::Source::PdePoint);
  for (std::size_t k = 0; k < 11; ++k)
    EXPECT_TRUE(abs_close(tr.samples[k], exp(-sqr(pi(p)) * times[k]) * sin(pi(p) * x0), -8)) << k;
  MeasurementTrace at_node = point_trace(sol, sol.x_nodes[17], times);
  for (std::size_t k = 0; k < 11; ++k) EXPECT_EQ(at_node.samples[k], sol.grid(17, k));
  // Off-grid times interpolate linearly between slices.
  MeasurementTrace mid = point_trace(sol, x0, {Real("0.005", p)});
  EXPECT_TRUE(rel_close(mid.samples[0], (tr.samples[0] + tr.samples[1]) / 2, -40));
  EXPECT_THROW(point_trace(sol, x0, {Real("0.2", p)}), Error);
  EXPECT_THROW(point_trace(sol, Real(1L, p), times), Error);

  ForwardSolution flat = sol;
  for (std::size_t i = 0; i < 60; ++i)
    for (std::size_t j = 0; j < 11; ++j) flat.grid(i, j) = Real("0.7", p);
  EXPECT_TRUE(rel_close(point_trace(flat, Real("0.3141", p), times).samples[4], Real("0.7", p), -140));
}

TEST(Traces, IntegralTrace) {
  const prec_t p = 512;
  ForwardSolution sol = forward_solve(Potential::zero(p), first_mode(p), Real("0.1", p), 60, 11, p);
  RealVec times = uniform_times(Real("0.01", p), 11);
  MeasurementTrace same = integral_trace(sol, first_mode(p), times);
  MeasurementTrace ortho = integral_trace(sol, MeasurementKernel{{Real(p), Real(1L, p)}}, times);
  EXPECT_EQ(same.source, MeasurementTrace::Source::PdeIntegral);
  EXPECT_TRUE(rel_close(same.samples[0], Real("0.5", p), -50));
  for (std::size_t k = 0; k < 11; ++k) {
    EXPECT_TRUE(abs_close(same.samples[k], exp(-sqr(pi(p)) * times[k]) / 2, -8)) << k;
    EXPECT_TRUE(abs_close(ortho.samples[k], Real(p), -8)) << k;
  }
  EXPECT_THROW(integral_trace(sol, first_mode(p), {Real(-1L, p)}), Error);
}
