#include <gtest/gtest.h>

#include "mcpert/bounds.hpp"
#include "mcpert/models.hpp"

namespace {

using namespace mcpert;

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

TEST(TwoState, HandValuesAndValidation) {
  const auto cf = two_state_closed_forms(0.5, 0.5);
  EXPECT_EQ(cf.pi(0), 0.5);
  EXPECT_EQ(cf.pi(1), 0.5);
  Matrix d(2, 2);
  d << 0.5, -0.5, -0.5, 0.5;
  EXPECT_LT(max_abs(cf.deviation - d), 1e-15);
  EXPECT_EQ(cf.kappa3, 0.5);
  EXPECT_EQ(cf.kappa6, 1.0);
  EXPECT_THROW(two_state_kernel(0.0, 0.5), Error);
  EXPECT_THROW(two_state_kernel(0.5, 1.0), Error);
  const auto sym = two_state_closed_forms(0.3, 0.3);
  EXPECT_EQ(sym.pi(0), sym.pi(1));
}

TEST(TwoState, ClosedFormsMatchNumerics) {
  for (double p = 0.05; p < 1.0; p += 0.15) {
    for (double q = 0.05; q < 1.0; q += 0.15) {
      for (double alpha : {1.0, 1.5, 3.0}) {
        const auto kernel = two_state_kernel(p, q);
        const auto cf = two_state_closed_forms(p, q, alpha);
        const auto ed = ergodic_decomposition(kernel);
        EXPECT_LT((cf.pi - ed.pi.values()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT(max_abs(cf.deviation - ed.deviation), 1e-12);
        EXPECT_NEAR(cf.kappa3, kappa3(ed.deviation), 1e-12);
        EXPECT_NEAR(cf.kappa6, kappa6(ed.deviation), 1e-12);
        const auto taboo = taboo_norms(kernel, NormKind::v(alpha));
        EXPECT_NEAR(cf.taboo.first_column, taboo.first_column, 1e-12);
        EXPECT_NEAR(cf.taboo.first_row, taboo.first_row, 1e-12);
      }
    }
  }
}

TEST(Ring, DeviationHandValuesAndZeroSum) {
  const Matrix d = ring_deviation(3, 0.5);
  EXPECT_NEAR(d(0, 0), 4.0 / 9.0, 1e-15);
  EXPECT_NEAR(d(0, 1), -2.0 / 9.0, 1e-15);
  EXPECT_NEAR(d(0, 2), -2.0 / 9.0, 1e-15);
  for (Index n : {2, 3, 7, 20, 51}) {
    for (double b : {0.1, 0.3, 0.5}) EXPECT_NEAR(ring_deviation(n, b).row(0).sum(), 0.0, 1e-12);
  }
  EXPECT_THROW(ring_kernel(1, 0.2), Error);
  EXPECT_THROW(ring_kernel(5, 0.6), Error);
}

TEST(Ring, ClosedFormsMatchNumerics) {
  for (Index n : {2, 3, 4, 5, 10, 25, 50}) {
    for (double b : {0.05, 0.2, 0.35, 0.5}) {
      const auto kernel = ring_kernel(n, b);
      const auto ed = ergodic_decomposition(kernel);
      EXPECT_LT((ed.pi.values().array() - 1.0 / static_cast<double>(n)).abs().maxCoeff(), 1e-12);
      EXPECT_LT(max_abs(ring_deviation(n, b) - ed.deviation), 1e-10) << "n=" << n << " b=" << b;
      EXPECT_NEAR(ring_kappa3(n, b), kappa3(ed.deviation), 1e-10);
    }
  }
}

TEST(Ring, KappaThreeGrowsLinearly) {
  EXPECT_NEAR(ring_kappa3(2000, 0.25) / ring_kappa3(1000, 0.25), 2.0, 1e-3);
}

TEST(Ring, TabooNormsUnderOneNorm) {
  for (Index n : {3, 5, 8}) {
    const auto taboo = taboo_norms(ring_kernel(n, 0.5), NormKind::one());
    EXPECT_NEAR(taboo.first_column, 1.0, 1e-15);
    EXPECT_NEAR(taboo.first_row, 1.0, 1e-15);
  }
}

TEST(Star, HandValues) {
  const auto cf = star_closed_forms(3, 0.5, 0.5);
  EXPECT_NEAR(cf.pi(0), 0.5, 1e-15);
  EXPECT_NEAR(cf.pi(1), 0.25, 1e-15);
  EXPECT_NEAR(cf.pi(2), 0.25, 1e-15);
  EXPECT_NEAR(cf.deviation(0, 0), 0.5, 1e-15);
  const auto five = star_closed_forms(5, 0.5, 0.5);
  EXPECT_EQ(five.kappa3, 1.0);
  EXPECT_EQ(five.kappa6, 2.0);
  const auto ed = ergodic_decomposition(star_kernel(5, 0.5, 0.5));
  EXPECT_NEAR(kappa3(ed.deviation), 1.0, 1e-12);
  EXPECT_NEAR(kappa6(ed.deviation), 2.0, 1e-12);
  EXPECT_THROW(star_kernel(3, 0.0, 0.5), Error);
  EXPECT_THROW(star_kernel(3, 0.5, 1.0), Error);
}

TEST(Star, ClosedFormsMatchNumerics) {
  for (Index n : {2, 5, 20, 50}) {
    for (double beta : {0.1, 0.5, 1.0}) {
      for (double gamma : {0.0, 0.3, 0.8}) {
        const auto kernel = star_kernel(n, beta, gamma);
        const auto cf = star_closed_forms(n, beta, gamma);
        const auto ed = ergodic_decomposition(kernel);
        EXPECT_LT((cf.pi - ed.pi.values()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT(max_abs(cf.deviation - ed.deviation), 1e-10) << n << ' ' << beta << ' ' << gamma;
        const auto taboo = taboo_norms(kernel, NormKind::one());
        EXPECT_NEAR(cf.taboo_one.first_column, taboo.first_column, 1e-12);
        EXPECT_NEAR(cf.taboo_one.first_row, taboo.first_row, 1e-12);
      }
    }
  }
}

TEST(RandomChain, DeterministicPositiveUnichain) {
  const auto a = random_chain(12, 77);
  const auto b = random_chain(12, 77);
  EXPECT_EQ(a.matrix(), b.matrix());
  EXPECT_NE(a.matrix(), random_chain(12, 78).matrix());
  EXPECT_GT(a.matrix().minCoeff(), 0.0);
  for (Index i = 0; i < 12; ++i) EXPECT_NEAR(a.matrix().row(i).sum(), 1.0, 1e-12);
  EXPECT_TRUE(validate_unichain(a).ok());
}

TEST(RandomReversibleChain, DetailedBalance) {
  const auto p = random_reversible_chain(9, 3);
  const RowVector pi = stationary_distribution(p).values();
  for (Index i = 0; i < 9; ++i) {
    for (Index j = 0; j < 9; ++j) EXPECT_NEAR(pi(i) * p(i, j), pi(j) * p(j, i), 1e-15);
  }
}

QueueSpec standard_queue(Index n) { return {0.5, Exponential{1.0}, 1.0, n}; }

TEST(Queue, KernelHandValues) {
  const auto p0 = mg1_breakdown_kernel(standard_queue(50), 0.0);
  EXPECT_NEAR(p0(0, 0), 2.0 / 3.0, 1e-15);
  const auto p1 = mg1_breakdown_kernel(standard_queue(50), 1.0);
  EXPECT_NEAR(p1(1, 1), 2.0 / 3.0, 1e-15);
  for (Index i = 1; i <= 50; ++i) {
    for (Index j = 0; j < i; ++j) EXPECT_EQ(p1(i, j), 0.0);
  }
  EXPECT_EQ(p1(0, 0), 0.0);
  EXPECT_THROW(mg1_breakdown_kernel(standard_queue(50), 1.5), Error);
}

TEST(Queue, SkipFreeLumpedAndConvex) {
  const QueueSpec spec = standard_queue(30);
  const QueueKernels k = mg1_kernels(spec);
  for (double theta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const auto pt = mg1_breakdown_kernel(spec, theta);
    EXPECT_GE(pt.matrix().minCoeff(), 0.0);
    EXPECT_EQ(pt.matrix(), ((1.0 - theta) * k.p0.matrix() + theta * k.p1.matrix()).eval());
    for (Index i = 0; i <= spec.N; ++i) {
      EXPECT_NEAR(pt.matrix().row(i).sum(), 1.0, 1e-15);
      for (Index j = 0; j + 1 < i; ++j) EXPECT_EQ(pt(i, j), 0.0);
    }
  }
}

TEST(Queue, LargeTruncationMatchesInfiniteQueue) {
  const auto pi = stationary_distribution(mg1_breakdown_kernel(standard_queue(200), 0.0));
  EXPECT_LT(pi[200], 1e-10);
  EXPECT_NEAR(pi[0], 0.5, 1e-6);
}

TEST(Queue, AtomMixtureService) {
  // Deterministic service of length 1 at lambda = 0.5: a_m = e^-0.5 0.5^m / m!.
  const QueueSpec spec{0.5, AtomMixture{{{1.0, 1.0}}}, 1.0, 20};
  const auto p0 = mg1_breakdown_kernel(spec, 0.0);
  EXPECT_NEAR(p0(0, 0), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(p0(0, 2), std::exp(-0.5) * 0.125, 1e-15);
  EXPECT_NEAR(p0(3, 2), std::exp(-0.5), 1e-15);

  // A two-atom mixture is the weighted sum of its atoms.
  const QueueSpec mix{0.5, AtomMixture{{{0.5, 0.25}, {1.5, 0.75}}}, 1.0, 20};
  const QueueSpec lo{0.5, AtomMixture{{{0.5, 1.0}}}, 1.0, 20};
  const QueueSpec hi{0.5, AtomMixture{{{1.5, 1.0}}}, 1.0, 20};
  const Matrix expected = 0.25 * mg1_kernels(lo).p0.matrix() + 0.75 * mg1_kernels(hi).p0.matrix();
  EXPECT_LT(max_abs(mg1_kernels(mix).p0.matrix() - expected), 1e-15);

  EXPECT_THROW((ServiceDistribution{AtomMixture{{{1.0, 0.5}}}}), Error);
  EXPECT_THROW((ServiceDistribution{AtomMixture{{{-1.0, 1.0}}}}), Error);
  EXPECT_THROW((ServiceDistribution{Exponential{0.0}}), Error);
}

TEST(QueueSsb, CoefficientHandValues) {
  const auto c = mg1_ssb_coefficients(0.5, 1.0, 1.0, 1.0);
  EXPECT_NEAR(c.b1, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(c.b2(), 0.75, 1e-15);
  EXPECT_NEAR(c.b3, 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(c.z_lambda, 3.0, 1e-15);
  EXPECT_NEAR(c.b2(0.4), 0.6, 1e-15);
}

double row_zero_mass(const Matrix& m, double alpha) {
  double total = 0.0;
  for (Index j = 0; j + 1 < m.cols(); ++j) total += std::pow(alpha, static_cast<double>(j)) * std::abs(m(0, j));
  return total;
}

TEST(QueueSsb, CoefficientsAreRowZeroMasses) {
  // b1 and b3 are the alpha-weighted masses of row 0 of the taboo kernel and of P1 - P0;
  // the lumped column N is excluded since it carries the truncated tail.
  const QueueKernels k = mg1_kernels(standard_queue(200));
  for (double alpha : {1.0, 1.2, 1.5, 1.7}) {
    const auto c = mg1_ssb_coefficients(0.5, 1.0, 1.0, alpha);
    EXPECT_NEAR(row_zero_mass(remove_column(k.p0, 0), alpha), c.b1, 1e-12);
    EXPECT_NEAR(row_zero_mass(Matrix(k.p1.matrix() - k.p0.matrix()), alpha), c.b3, 1e-12);
    EXPECT_NEAR(c.b2(), 0.5 / (1.0 - c.b1), 1e-15);
  }
}

TEST(QueueSsb, SeriesAgreesWithClosedFormWhenRatesCoincide) {
  for (double alpha : {1.0, 1.3, 1.79}) {
    const double closed = detail::mg1_b3(0.5, 1.0, 1.0, alpha);
    EXPECT_NEAR(detail::mg1_b3_series(0.5, 1.0, 1.0, alpha), closed, 1e-12 * closed);
  }
  for (double r : {0.5, 2.0}) {
    const QueueKernels k = mg1_kernels({0.5, Exponential{1.0}, r, 200});
    for (double alpha : {1.0, 1.2, 1.6}) {
      const auto c = mg1_ssb_coefficients(0.5, 1.0, r, alpha);
      EXPECT_NEAR(row_zero_mass(Matrix(k.p1.matrix() - k.p0.matrix()), alpha), c.b3, 1e-10 * c.b3) << r << ' ' << alpha;
    }
  }
}

TEST(QueueSsb, DomainErrors) {
  try {
    mg1_ssb_coefficients(0.5, 1.0, 1.0, 3.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfDomain);
  }
  try {
    mg1_ssb_coefficients(0.5, 1.0, 1.0, 1.9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TabooNotProper);
  }
  EXPECT_THROW(mg1_ssb_coefficients(0.5, 1.0, 1.0, 0.9), Error);
}

TEST(QueueSsb, FeasibilityCeiling) {
  const double ceiling = mg1_feasibility_ceiling(0.5, 1.0);
  EXPECT_NEAR(ceiling, 1.8, 1e-15);
  EXPECT_LT(detail::mg1_b1(0.5, 1.0, ceiling - 1e-9), 1.0);
  EXPECT_GE(detail::mg1_b1(0.5, 1.0, ceiling + 1e-9), 1.0);
  // b1 blows up toward the transform's pole at z_lambda = 3.
  EXPECT_GT(detail::mg1_b1(0.5, 1.0, 3.0 - 1e-9), 1e8);
}

TEST(QueueSsb, BoundAndStability) {
  EXPECT_EQ(mg1_ssb_bound(0.5, 1.0, 1.0, 1.0, 0.0).value, 0.0);
  const auto report = mg1_ssb_bound(0.5, 1.0, 1.0, 1.0, 0.01);
  ASSERT_TRUE(report.applicable);
  const double growth = 1.75 * 4.0 / 3.0;
  EXPECT_NEAR(report.value, 0.75 * 0.01 * growth / (2.0 / 3.0 - 0.01 * growth), 1e-15);
  EXPECT_FALSE(mg1_ssb_bound(0.5, 1.0, 1.0, 1.0, 0.5).applicable);

  const auto best = mg1_stability_lower_bound(0.5, 1.0, 1.0);
  EXPECT_NEAR(best.value, 0.5, 1e-9);
  EXPECT_EQ(best.alpha, 1.0);
  // General closed form of (1 - b1) / b3 for mu = r.
  for (double alpha : {1.0, 1.2, 1.6}) {
    const auto c = mg1_ssb_coefficients(0.5, 1.0, 1.0, alpha);
    EXPECT_NEAR((1.0 - c.b1) / c.b3, (9.0 - 5.0 * alpha) / (6.0 + 2.0 * alpha), 1e-14);
  }
}

TEST(TwoStateOracles, RatioAndConsistency) {
  const TwoStateParams params{0.3, 0.2, 0.35, 0.15};
  for (double alpha : {1.0, 2.0, 5.0}) {
    const auto o = two_state_bound_oracles(params, alpha, 0.1);
    EXPECT_GE(o.cnb_seb0_ratio, 1.0);
    EXPECT_NEAR(o.cnb.value / o.seb0.value, o.cnb_seb0_ratio, 1e-12);
  }
  const auto o = two_state_bound_oracles(params, 1.0, 0.1);
  EXPECT_NEAR(o.cnb_seb0_ratio, 2.0 * 0.3 / 0.5, 1e-15);
  EXPECT_GT(o.cnb_seb0_ratio, 1.0);
}

TEST(TwoStateOracles, MatchGenericBoundsForGeneralAlpha) {
  // Against the generic path with c = alpha, which bounds ||pi^T||_v on two states.
  const TwoStateParams params{0.3, 0.45, 0.4, 0.3};
  for (double alpha : {1.0, 1.5, 2.5}) {
    const NormKind v = NormKind::v(alpha);
    const PerturbationPair pair(two_state_kernel(params.p, params.q), two_state_kernel(params.p_tilde, params.q_tilde), v);
    const auto ed = ergodic_decomposition(pair.p());
    const CBound c(alpha);
    for (double theta : {0.05, 0.2, 0.6}) {
      const ScaledPerturbation pert(pair, theta);
      const auto o = two_state_bound_oracles(params, alpha, theta);
      EXPECT_NEAR(o.cnb.value, cnb_bound(kappa_norm(ed.deviation, v, c), BoundFamily::CnbNorm, pert).value, 1e-12);
      EXPECT_NEAR(o.seb0.value, seb(pert, ed, 0, c).value, 1e-12);
      EXPECT_NEAR(o.seb1.value, seb(pert, ed, 1, c).value, 1e-12);
      const auto db = direct_bound(pert, ed);
      ASSERT_EQ(o.db.applicable, db.applicable);
      if (db.applicable) {
        EXPECT_NEAR(o.db.value, db.value, 1e-12);
      }
    }
  }
}

}  // namespace
