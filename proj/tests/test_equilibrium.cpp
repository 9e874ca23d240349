#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qlc/equilibrium.hpp"
#include "qlc/sphere.hpp"
#include "support.hpp"

using namespace qlc;
using namespace qlc::test;

namespace {

// Independent reference: composite Simpson in long double for
// J(eta) = int_0^1 exp(eta (x^2 - 1)) dx, and a dense sign scan for roots.
long double simpsonJ(long double eta, int n = 20000) {
  const long double h = 1.0L / n;
  long double s = std::exp(-eta) + 1.0L;
  for (int i = 1; i < n; ++i) {
    const long double x = i * h;
    s += (i % 2 ? 4.0L : 2.0L) * std::exp(eta * (x * x - 1.0L));
  }
  return s * h / 3.0L;
}

long double oracleResidual(long double eta, long double alpha, int n = 20000) {
  return 3.0L / simpsonJ(eta, n) - 3.0L - 2.0L * eta - 4.0L * eta * eta / alpha;
}

std::vector<double> oracleRoots(double alpha, double lo, double hi) {
  std::vector<double> roots;
  // grid offset so that eta = 0 never falls on a node; brackets around 0 are skipped
  const double step = 0.0503;
  double a = lo;
  long double fa = oracleResidual(a, alpha, 2000);
  for (int k = 1; lo + k * step <= hi; ++k) {
    const double b = lo + k * step;
    const long double fb = oracleResidual(b, alpha, 2000);
    if ((fa < 0) != (fb < 0) && !(a < 0 && b > 0)) {
      long double x0 = a, x1 = b, f0 = fa;
      for (int it = 0; it < 80; ++it) {
        const long double m = 0.5L * (x0 + x1);
        const long double fm = oracleResidual(m, alpha);
        if ((fm < 0) == (f0 < 0)) {
          x0 = m;
          f0 = fm;
        } else {
          x1 = m;
        }
      }
      roots.push_back(static_cast<double>(0.5L * (x0 + x1)));
    }
    a = b;
    fa = fb;
  }
  return roots;
}

// Largest value of the residual over eta in [0.5, 10]; positive iff two nonzero roots exist there.
long double oracleMaxResidual(long double alpha) {
  long double best = 0.5L, fbest = oracleResidual(best, alpha);
  for (long double e = 0.5L; e <= 10.0L; e += 0.01L) {
    const long double f = oracleResidual(e, alpha, 2000);
    if (f > fbest) {
      fbest = f;
      best = e;
    }
  }
  long double a = best - 0.01L, b = best + 0.01L;
  const long double gr = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  for (int it = 0; it < 80; ++it) {
    const long double c = b - gr * (b - a), d = a + gr * (b - a);
    if (oracleResidual(c, alpha) > oracleResidual(d, alpha))
      b = d;
    else
      a = c;
  }
  return oracleResidual(0.5L * (a + b), alpha);
}

const double kAlphas[] = {7.0, 8.0, 10.0, 15.0};

}  // namespace

TEST(SolveEta, IsotropicIsZero) {
  for (double a : {1.0, 5.0, 8.0}) {
    EXPECT_EQ(solveEta(a, Branch::Isotropic), 0.0);
    EXPECT_NEAR(criticalResidual(0.0, a), 0.0, 1e-14);
  }
}

TEST(SolveEta, StableRootMatchesOracle) {
  for (double a : kAlphas) {
    const std::vector<double> roots = oracleRoots(a, -40.0, 60.0);
    ASSERT_FALSE(roots.empty());
    const double eta = solveEta(a, Branch::Stable);
    EXPECT_NEAR(eta, roots.back(), 1e-9) << "alpha " << a;
    EXPECT_LE(std::abs(criticalResidual(eta, a)), 1e-10);
    EXPECT_GT(eta, criticalAlpha().eta);
  }
}

TEST(SolveEta, UnstableRootMatchesOracle) {
  for (double a : kAlphas) {
    const std::vector<double> roots = oracleRoots(a, -40.0, 60.0);
    ASSERT_EQ(roots.size(), 2u) << "alpha " << a << " first root " << roots.front();
    EXPECT_NEAR(solveEta(a, Branch::Unstable), roots.front(), 1e-9);
  }
}

TEST(SolveEta, RegressionValues) {
  EXPECT_NEAR(solveEta(7.0, Branch::Stable), 3.5636367929576926, 1e-10);
  EXPECT_NEAR(solveEta(8.0, Branch::Stable), 5.4006926609565475, 1e-10);
  EXPECT_NEAR(solveEta(10.0, Branch::Stable), 7.901371605184697, 1e-10);
}

TEST(SolveEta, StableBranchIncreasesWithAlpha) {
  const double a0 = criticalAlpha().alpha;
  double prev_eta = solveEta(a0 + 0.01, Branch::Stable);
  double prev_s2 = orderParameters(prev_eta).s2;
  for (double a = a0 + 0.11; a <= 20.0; a += 0.1) {
    const double eta = solveEta(a, Branch::Stable);
    const double s2 = orderParameters(eta).s2;
    EXPECT_GT(eta, prev_eta);
    EXPECT_GT(s2, prev_s2);
    prev_eta = eta;
    prev_s2 = s2;
  }
}

TEST(SolveEta, MissingBelowCriticalAlpha) {
  EXPECT_THROW(solveEta(6.5, Branch::Stable), BranchMissing);
  EXPECT_THROW(solveEta(6.5, Branch::Unstable), BranchMissing);
  EXPECT_THROW(phaseConstants(6.0, 1.0, 0.5), BranchMissing);
}

TEST(CriticalAlpha, RegressionValueAndTangency) {
  const CriticalPoint c = criticalAlpha();
  EXPECT_NEAR(c.alpha, 6.731486396483, 1e-9);
  EXPECT_NEAR(c.eta, 2.178287974845, 1e-6);
  EXPECT_LE(std::abs(criticalResidual(c.eta, c.alpha)), 1e-10);
  EXPECT_LE(std::abs(criticalResidualDeta(c.eta, c.alpha)), 1e-10);
}

TEST(CriticalAlpha, RootCountChangesAcrossFold) {
  const double tol = 1e-10;
  const CriticalPoint c = criticalAlpha(tol);
  EXPECT_LT(oracleMaxResidual(c.alpha - 10 * tol), 0.0L);
  EXPECT_GT(oracleMaxResidual(c.alpha + 10 * tol), 0.0L);
}

TEST(CriticalAlpha, AgreesWithMomentRatio) {
  const CriticalPoint c = criticalAlpha();
  const OrderParameters op = orderParameters(c.eta);
  EXPECT_NEAR(op.a0 / (op.a2 - op.a4), c.alpha, 1e-6);
}

TEST(OrderParameters, IsotropicAndAlignedLimits) {
  const OrderParameters iso = orderParameters(0.0);
  EXPECT_NEAR(iso.s2, 0.0, 1e-14);
  EXPECT_NEAR(iso.s4, 0.0, 1e-14);
  const OrderParameters al = orderParameters(200.0);
  EXPECT_NEAR(al.s2, 1.0, 5e-2);
  EXPECT_NEAR(al.s4, 1.0, 5e-2);
}

TEST(OrderParameters, RegressionValues) {
  EXPECT_NEAR(orderParameters(solveEta(7.0, Branch::Stable)).s2, 0.5090909704225265, 1e-10);
  EXPECT_NEAR(orderParameters(solveEta(8.0, Branch::Stable)).s2, 0.6750865826195671, 1e-10);
}

TEST(OrderParameters, FixedPointRelation) {
  for (double a : kAlphas) {
    const double eta = solveEta(a, Branch::Stable);
    EXPECT_NEAR(orderParameters(eta).s2, eta / a, 1e-12);
  }
}

class PhaseInvariants : public ::testing::TestWithParam<double> {};

TEST_P(PhaseInvariants, Hold) {
  const double alpha = GetParam() < 0 ? criticalAlpha().alpha + 0.5 : GetParam();
  const PhaseConstants c = phaseConstants(alpha, 1.0, 0.5);
  const double s2 = c.s2;
  EXPECT_LE(std::abs(criticalResidual(c.eta, alpha)), 1e-10);
  EXPECT_NEAR(c.a0 / (c.a2 - c.a4) / alpha, 1.0, 1e-8);
  EXPECT_GT(3 * c.a2 * c.a2 + 2 * c.a0 * c.a2 - 5 * c.a0 * c.a4, 0.0);
  EXPECT_GT(6 * c.a2 - 5 * c.a4 - c.a0, 0.0);
  EXPECT_NEAR(c.xi2 + c.xi3, 1.0 / alpha, 1e-10);
  EXPECT_NEAR(c.psi2 + c.psi3, alpha, 1e-8);
  EXPECT_NEAR(c.xi1, c.s4 - s2 * s2, 1e-15);
  EXPECT_NEAR(c.xi3, (c.a4 - 2 * c.a2 + c.a0) / (4 * c.a0), 1e-12);
  EXPECT_GT(c.xi3, 0.0);
  EXPECT_NEAR(c.s2, (3 * c.a2 - c.a0) / (2 * c.a0), 1e-12);
  EXPECT_NEAR(c.alpha2 + c.alpha3, c.alpha6 - c.alpha5, 1e-12);
  EXPECT_NEAR(c.alpha2 + c.alpha3, -s2, 1e-12);
  EXPECT_NEAR(c.gamma1, c.alpha3 - c.alpha2, 1e-12);
  EXPECT_NEAR(c.gamma2, -s2, 1e-12);
  EXPECT_NEAR(c.zeta, -c.gamma2 / c.gamma1, 1e-12);
  EXPECT_NEAR(c.zeta, 1.0 / 3 + 2.0 / (3 * s2) - 2.0 / (s2 * alpha), 1e-10);
  EXPECT_NEAR(c.alpha1, -c.s4 / 2, 1e-15);
  EXPECT_NEAR(c.k1, 2 * (1.0 + 0.5) * s2 * s2, 1e-14);
  EXPECT_EQ(c.k1, c.k3);

  // dissipation
  EXPECT_GT(c.gamma1, 0.0);
  EXPECT_GT(c.alpha4, 0.0);
  EXPECT_GT(c.alpha1 + c.gamma2 * c.gamma2 / c.gamma1, 0.0);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 2000; ++t) {
    const Mat3 d = randomQ(rng).matrix();
    const Vec3 n = randomUnit(rng);
    const Vec3 dn = d * n;
    const double ndn = dot(n, dn);
    const Vec3 perp = dn - ndn * n;
    // minimized over the co-rotational director rate
    const double form = c.alpha1 * ndn * ndn + c.alpha4 * ddot(d, d) + (c.alpha5 + c.alpha6) * dot(dn, dn) -
                        c.gamma2 * c.gamma2 / c.gamma1 * dot(perp, perp);
    EXPECT_GT(form, 0.0);
  }
}

INSTANTIATE_TEST_SUITE_P(Alphas, PhaseInvariants, ::testing::Values(-1.0, 7.0, 8.0, 10.0, 15.0));

TEST(PhaseConstants, RejectsNonCoerciveElasticity) {
  EXPECT_THROW(phaseConstants(8.0, 0.0, 0.5), std::invalid_argument);
  EXPECT_THROW(phaseConstants(8.0, 1.0, -0.6), std::invalid_argument);
  EXPECT_NO_THROW(phaseConstants(8.0, 1.0, -0.4));
}

TEST(PhaseConstants, PsiInvertsXi) {
  const PhaseConstants c = phaseConstants(8.0, 1.0, 0.5);
  // Q -> xi1 P(nn:Q) + xi2 (...) + xi3 Q acts with eigenvalue xi3 on tensors orthogonal to nn
  // and its in-space, xi2 + xi3 on the in-space and 2/3 xi1 + 4/3 xi2 + xi3 on the axis.
  EXPECT_NEAR(c.psi3 * c.xi3, 1.0, 1e-12);
  EXPECT_NEAR((c.psi2 + c.psi3) * (c.xi2 + c.xi3), 1.0, 1e-12);
  EXPECT_NEAR((2.0 / 3 * c.psi1 + 4.0 / 3 * c.psi2 + c.psi3) * (2.0 / 3 * c.xi1 + 4.0 / 3 * c.xi2 + c.xi3), 1.0,
              1e-12);
}

TEST(PhaseConstants, ZetaRegression) {
  EXPECT_NEAR(phaseConstants(7.0, 1.0, 0.5).zeta, 1.0816, 1e-4);
  EXPECT_NEAR(phaseConstants(8.0, 1.0, 0.5).zeta, 0.9505, 1e-4);
}
