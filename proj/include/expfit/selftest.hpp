#pragma once

#include <random>
#include <string>
#include <vector>

#include "expfit/analysis.hpp"
#include "expfit/condnum.hpp"

namespace expfit {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline RealVec random_vec(std::mt19937_64& rng, std::size_t n, double lo, double hi, prec_t p) {
  std::uniform_real_distribution<double> d(lo, hi);
  RealVec v;
  for (std::size_t i = 0; i < n; ++i) v.emplace_back(d(rng), p);
  return v;
}

}  // namespace detail

// Analysis oracle suite: every check is an identity or a bound evaluated two independent ways.
inline std::vector<CheckResult> analysis_selftest(std::uint64_t seed = 1) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(seed);

  {
    const prec_t p = 192;
    std::size_t checked = 0, failed = 0;
    for (const char* d : {"0.1", "1"})
      for (std::size_t n1 = 1; n1 <= 20; ++n1) {
        RealVec lam;
        for (std::size_t n = 1; n <= n1 + 1; ++n) lam.emplace_back(static_cast<long>(n * n), p);
        AnalysisContext ctx = make_context(lam, Real(d, p), n1);
        for (std::size_t n = 1; n <= n1; ++n) {
          ThetaTriple t = theta_sums(ctx, n);
          ThetaBounds b = theta_bounds(ctx, n);
          bool ok = b.theta1.contains(t.theta1) && (!b.theta2 || b.theta2->contains(t.theta2)) &&
                    (!b.theta3 || b.theta3->contains(t.theta3));
          ++checked;
          if (!ok) ++failed;
        }
      }
    out.push_back({"theta sandwich bounds", failed == 0,
                   std::to_string(checked - failed) + "/" + std::to_string(checked) + " (n, N1, delta) triples"});
  }

  {
    const prec_t p = 128;
    bool ok = true;
    std::string detail;
    for (const char* e : {"0.3", "0.5", "0.7"}) {
      Real eta(e, p);
      long n0 = psi_bound_onset(eta, 200);
      Real a = eta_cubic_coefficient(eta);
      for (long n1 = n0; n1 <= 200 && ok; ++n1) {
        long n = floor(eta * n1).to_long();
        ok = Real(psi(n, n1), p) >= a * pow(Real(n1, p), 3);
      }
      detail += std::string(detail.empty() ? "" : ", ") + "eta=" + e + " onset " + std::to_string(n0);
    }
    out.push_back({"Psi >= a(eta) N1^3 scan to N1 = 200", ok, detail});
  }

  {
    const prec_t p = 128;
    std::uniform_int_distribution<int> len(1, 12);
    int failed = 0;
    for (int trial = 0; trial < 1000; ++trial)
      if (!maclaurin_check(detail::random_vec(rng, static_cast<std::size_t>(len(rng)), 0.0, 5.0, p))) ++failed;
    out.push_back({"MacLaurin chain", failed == 0, std::to_string(1000 - failed) + "/1000 random vectors"});
  }

  {
    const prec_t p = 256;
    const Real floor_v = ldexp(Real(1L, p), -200);
    Real worst(p);
    for (std::size_t n1 = 2; n1 <= 4; ++n1) {
      SpectralModel m;
      m.n1 = n1;
      m.n2 = 1;
      m.delta = Real("0.3", p);
      m.epsilon = Real("0.001", p);
      RealVec jitter = detail::random_vec(rng, n1 + 1, 0.0, 0.5, p);
      m.amplitudes = detail::random_vec(rng, n1 + 1, 0.5, 2.0, p);
      for (std::size_t n = 1; n <= n1 + 1; ++n) m.lambdas.push_back(Real(static_cast<long>(n * n), p) + jitter[n - 1]);
      RealMatrix d = tail_matrix(m);
      for (std::size_t r = 0; r + 1 <= n1 - 1; ++r) {
        RealMatrix a = higher_order_adjugate(d, r);
        for (std::size_t i = 0; i < a.rows(); ++i)
          for (std::size_t j = 0; j < a.cols(); ++j) worst = max(worst, abs(a(i, j)));
      }
    }
    out.push_back({"adjugate vanishing below order N1 - 1", worst <= floor_v, "max entry " + worst.to_string(6)});
  }

  {
    const prec_t p = 192;
    RealVec chi = detail::random_vec(rng, 5, -2.0, 2.0, p);
    Real worst(p);
    for (std::size_t k = 1; k <= chi.size(); ++k) {
      TwoWay w = vandermonde_symmetric_identity(chi, k);
      worst = max(worst, rel_err(w.direct, w.formula));
    }
    out.push_back({"Vandermonde symmetric-function identity", worst <= Real("1e-45", p),
                   "max rel gap " + worst.to_string(6)});
  }

  {
    const prec_t p = 192;
    Real worst(p);
    for (int trial = 0; trial < 5; ++trial) {
      RealVec nodes = detail::random_vec(rng, 12, 0.0, 1.0, p);
      for (std::size_t j = 1; j <= nodes.size(); ++j) {
        Real sum(p);
        for (std::size_t n = 1; n <= nodes.size(); ++n) {
          HermitePair hp = hermite_eval(nodes, n, nodes[j - 1]);
          sum += hp.h;
          worst = max(worst, abs(hp.h - Real(n == j ? 1L : 0L, p)));
          worst = max(worst, abs(hp.htilde));
        }
        worst = max(worst, abs(sum - 1));
      }
    }
    out.push_back({"Hermite node identities", worst <= Real("1e-40", p), "max deviation " + worst.to_string(6)});
  }
  return out;
}

}  // namespace expfit
