#include <gtest/gtest.h>

#include "qlc/dynamics.hpp"
#include "qlc/linear_ops.hpp"
#include "support.hpp"

using namespace qlc;
using namespace qlc::test;

namespace {

struct Case {
  Vec3 n;
  Vec3 nperp;
  DirectorContext ctx;
};

Case setup(double alpha, std::uint64_t seed, const SphereQuadrature* quad = nullptr) {
  std::mt19937_64 rng(seed);
  const Vec3 n = randomUnit(rng);
  const Vec3 np = normalized(cross(n, randomUnit(rng)));
  return {n, np, makeDirectorContext(n, phaseConstants(alpha, 1.0, 0.5), quad)};
}

QTensor inTensor(const Vec3& n, const Vec3& np) {
  return QTensor::fromMatrix(Mat3::outer(n, np) + Mat3::outer(np, n));
}

double qdist(const QTensor& a, const QTensor& b) { return (a - b).norm(); }

const double kAlphas[] = {7.0, 8.0, 10.0, 15.0};

}  // namespace

TEST(DirectorContext, StoresClosedFormMoments) {
  const Case s = setup(8.0, 1, &defaultQuadrature());
  const PhaseConstants& c = s.ctx.constants;
  EXPECT_LT(maxAbsDiff(s.ctx.moments.m4, equilibriumM4(s.n, c.s2, c.s4)), 1e-10);
  // quadrature moments of the equilibrium density agree with the closed form
  const BinghamMoments q = momentsOf(QTensor::uniaxial(c.eta, s.n), defaultQuadrature());
  EXPECT_LT(maxAbsDiff(q.m4, equilibriumM4(s.n, c.s2, c.s4)), 1e-10);
  EXPECT_LT((q.q - QTensor::uniaxial(c.s2, s.n)).norm(), 1e-10);
  EXPECT_TRUE(s.ctx.has_m6);
  EXPECT_THROW(makeDirectorContext(Vec3{1.0, 1e-5, 0.0}, c), std::invalid_argument);
}

TEST(LinearOps, InSpaceEigenvalues) {
  for (double a : kAlphas) {
    const Case s = setup(a, 2);
    const PhaseConstants& c = s.ctx.constants;
    const QTensor qin = inTensor(s.n, s.nperp);
    EXPECT_LT(qdist(applyQn(s.ctx, qin), (c.xi2 + c.xi3) * qin), 1e-12);
    EXPECT_LT(qdist(applyQnInverse(s.ctx, qin), a * qin), 1e-9);
    EXPECT_LT(applyHn(s.ctx, qin).norm(), 1e-9);
    const double j = 1.0 / 3 + c.s2 / 6 - 2 * (c.s2 - c.s4) / 7 - 2 * (c.s4 / 35 - 2 * c.s2 / 21 + 1.0 / 15);
    EXPECT_LT(qdist(applyJ(s.ctx.moments, qin.matrix()), j * qin), 1e-12);
  }
}

TEST(LinearOps, InverseComposesToIdentity) {
  std::mt19937_64 rng(3);
  for (double a : kAlphas) {
    const Case s = setup(a, 4);
    for (int t = 0; t < 100; ++t) {
      const QTensor q = randomQ(rng);
      EXPECT_LT(qdist(applyQnInverse(s.ctx, applyQn(s.ctx, q)), q), 1e-10);
      EXPECT_LT(qdist(applyQn(s.ctx, applyQnInverse(s.ctx, q)), q), 1e-10);
    }
    EXPECT_EQ(applyQnInverse(s.ctx, QTensor{}).norm(), 0.0);
  }
}

TEST(LinearOps, QnSelfAdjointAndMatchesCovariance) {
  std::mt19937_64 rng(5);
  const Case s = setup(8.0, 6);
  const PhaseConstants& c = s.ctx.constants;
  const SphereQuadrature& quad = defaultQuadrature();
  // covariance of mm under the equilibrium density
  const QTensor b0 = QTensor::uniaxial(c.eta, s.n);
  const double lz = logPartition(b0, quad);
  for (int t = 0; t < 10; ++t) {
    const QTensor b1 = randomQ(rng), b2 = randomQ(rng);
    EXPECT_NEAR(applyQn(s.ctx, b1).dot(b2), applyQn(s.ctx, b2).dot(b1), 1e-13);
    double cov = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < quad.size(); ++k) {
      const Vec3& m = quad.nodes[k];
      const Mat3 mm = Mat3::outer(m, m);
      const double w = quad.weights[k] * std::exp(ddot(mm, b0.matrix()) - lz);
      const double x1 = ddot(mm, b1.matrix()), x2 = ddot(mm, b2.matrix());
      cov += w * x1 * x2;
      m1 += w * x1;
      m2 += w * x2;
    }
    EXPECT_NEAR(applyQn(s.ctx, b1).dot(b2), cov - m1 * m2, 1e-10);
  }
}

TEST(LinearOps, HnStructure) {
  std::mt19937_64 rng(7);
  for (double a : kAlphas) {
    const Case s = setup(a, 8);
    for (int t = 0; t < 50; ++t) {
      const QTensor q = randomQ(rng);
      const QTensor h = applyHn(s.ctx, q);
      EXPECT_LT(qdist(projectOut(s.n, h), h), 1e-10);
      EXPECT_LT(qdist(h, applyQnInverse(s.ctx, q) - a * q), 1e-10);
    }
  }
}

TEST(LinearOps, CoercivityOnOutSpace) {
  std::mt19937_64 rng(9);
  for (double a : kAlphas) {
    const Case s = setup(a, 10);
    const double c0 = coercivityConstant(s.ctx);
    EXPECT_GT(c0, 0.0);
    const BetaCoefficients beta = betaCoefficients(s.ctx.constants);
    EXPECT_GT(beta.closed_form_margin, 0.0);
    EXPECT_NEAR(beta.beta2 + 2 * beta.beta3, 0.0, 1e-10);
    EXPECT_FALSE(beta.boundary_case);
    const auto basis = outBasis(s.n);
    for (int t = 0; t < 500; ++t) {
      std::normal_distribution<double> nd;
      QTensor q;
      for (const QTensor& e : basis) q += nd(rng) * e;
      EXPECT_GE(applyHn(s.ctx, q).dot(q), (c0 - 1e-12) * q.dot(q));
    }
  }
}

TEST(Projections, Properties) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const Vec3 n = randomUnit(rng);
    const QTensor q = randomQ(rng), r = randomQ(rng);
    const QTensor pin = projectIn(n, q), pout = projectOut(n, q);
    EXPECT_LT(qdist(pin + pout, q), 1e-14);
    EXPECT_LT(qdist(projectIn(n, pin), pin), 1e-14);
    EXPECT_LT(qdist(projectOut(n, pout), pout), 1e-14);
    EXPECT_NEAR(pin.dot(projectOut(n, r)), 0.0, 1e-14);
    const Vec3 qn = q.matrix() * n;
    const double qnn = dot(n, qn);
    EXPECT_NEAR(pin.dot(pin), 2 * dot(qn, qn) - 2 * qnn * qnn, 1e-14);
  }
  const Vec3 n{0, 0, 1}, np{1, 0, 0};
  const QTensor qin = inTensor(n, np);
  EXPECT_LT(qdist(projectIn(n, qin), qin), 1e-15);
  EXPECT_LT(projectOut(n, qin).norm(), 1e-15);
  EXPECT_LT(projectIn(n, QTensor::uniaxial(1.0, n)).norm(), 1e-15);
}

TEST(Projections, BasesAreOrthonormalAndComplementary) {
  std::mt19937_64 rng(12);
  const Vec3 n = randomUnit(rng);
  std::vector<QTensor> all;
  for (const QTensor& e : inBasis(n)) {
    EXPECT_LT(qdist(projectIn(n, e), e), 1e-14);
    all.push_back(e);
  }
  for (const QTensor& e : outBasis(n)) {
    EXPECT_LT(projectIn(n, e).norm(), 1e-14);
    all.push_back(e);
  }
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = 0; j < all.size(); ++j) EXPECT_NEAR(all[i].dot(all[j]), kd(i, j), 1e-14);
}

TEST(JOperator, CommutesWithProjectionsAndSelfAdjointOnQ) {
  std::mt19937_64 rng(13);
  const Case s = setup(8.0, 14);
  for (int t = 0; t < 100; ++t) {
    const QTensor q = randomQ(rng), r = randomQ(rng);
    const QTensor jq = applyJ(s.ctx.moments, q.matrix());
    EXPECT_LT(qdist(applyJ(s.ctx.moments, projectIn(s.n, q).matrix()), projectIn(s.n, jq)), 1e-13);
    EXPECT_LT(qdist(applyJ(s.ctx.moments, projectOut(s.n, q).matrix()), projectOut(s.n, jq)), 1e-13);
    EXPECT_NEAR(jq.dot(r), applyJ(s.ctx.moments, r.matrix()).dot(q), 1e-13);
    // on the out-space M equals its symmetric part
    const Mat3 a = projectOut(s.n, q).matrix();
    EXPECT_LT(maxAbs(applyMQ(s.ctx.moments, a) - applyJ(s.ctx.moments, a).matrix()), 1e-13);
  }
}

TEST(JOperator, AgreesWithClosurePointVersion) {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 30; ++t) {
    const QTensor q = samplePhysicalQ(rng, 0.1);
    const ClosurePoint p = solveClosure(q, 0.1, kDefaultClosureTol, defaultQuadrature());
    const BinghamMoments m = momentsOf(p.B(), defaultQuadrature());
    const Mat3 a = randomMat(rng);
    EXPECT_LT(qdist(applyJ(p, a), applyJ(m, a)), 1e-10);
  }
}

TEST(UOperator, ZeroAndLinearizationOfM4) {
  std::mt19937_64 rng(16);
  const SphereQuadrature& quad = defaultQuadrature();
  const BinghamMoments iso = momentsOf(QTensor{}, quad);
  Tensor4Sym zero;
  EXPECT_LT(maxAbsDiff(applyU(iso, QTensor{}), zero), 1e-15);
  for (int t = 0; t < 5; ++t) {
    const QTensor b0 = randomQ(rng, 4.0), b = randomQ(rng);
    const BinghamMoments m = momentsOf(b0, quad);
    const double h = 1e-4;
    Tensor4Sym fd = momentsOf(b0 + h * b, quad).m4;
    Tensor4Sym minus = momentsOf(b0 - h * b, quad).m4;
    minus *= -1.0;
    fd += minus;
    fd *= 1.0 / (2 * h);
    EXPECT_LT(maxAbsDiff(applyU(m, b), fd), 1e-6);
  }
}

TEST(LinearOps, RotationEquivariance) {
  std::mt19937_64 rng(17);
  const PhaseConstants c = phaseConstants(8.0, 1.0, 0.5);
  for (int t = 0; t < 20; ++t) {
    const Vec3 n = randomUnit(rng);
    const Mat3 r = randomRotation(rng);
    const DirectorContext a = makeDirectorContext(n, c);
    const DirectorContext b = makeDirectorContext(normalized(r * n), c);
    const QTensor q = randomQ(rng);
    const QTensor rq = QTensor::fromMatrix(conjugate(r, q.matrix()));
    EXPECT_LT(qdist(applyHn(b, rq), QTensor::fromMatrix(conjugate(r, applyHn(a, q).matrix()))), 1e-11);
    EXPECT_LT(qdist(applyQn(b, rq), QTensor::fromMatrix(conjugate(r, applyQn(a, q).matrix()))), 1e-13);
  }
}
