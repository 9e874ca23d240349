#include "qlc/linear_ops.hpp"

#include <cmath>
#include <stdexcept>

namespace qlc {

namespace {

double kd(int i, int j) { return i == j ? 1.0 : 0.0; }

// Two unit vectors completing n to an orthonormal frame.
std::pair<Vec3, Vec3> transverse(const Vec3& n) {
  const Vec3 trial = std::abs(n[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  const Vec3 m1 = normalized(trial - dot(trial, n) * n);
  const Vec3 m2 = cross(n, m1);
  return {m1, m2};
}

QTensor symOuter(const Vec3& a, const Vec3& b, double scale) {
  return QTensor::fromMatrix(scale * (Mat3::outer(a, b) + Mat3::outer(b, a)));
}

// c1 (nn - I/3)(nn:Q) + c2 (nn.Q + Q.nn - 2/3 I (nn:Q)) + c3 Q
QTensor threeTerm(const Vec3& n, const QTensor& q, double c1, double c2, double c3) {
  const Mat3 nn = Mat3::outer(n, n);
  const Mat3 qm = q.matrix();
  const double qnn = ddot(nn, qm);
  const Mat3 id = Mat3::identity();
  Mat3 r = (c1 * qnn) * (nn - (1.0 / 3.0) * id);
  r += c2 * (nn * qm + qm * nn - (2.0 / 3.0 * qnn) * id);
  r += c3 * qm;
  return QTensor::fromMatrix(r);
}

}  // namespace

Tensor4Sym equilibriumM4(const Vec3& n, double s2, double s4) {
  const double c2 = (s2 - s4) / 7.0;
  const double c0 = s4 / 35.0 - 2.0 * s2 / 21.0 + 1.0 / 15.0;
  return symTensorFrom<4>([&](const std::array<int, 4>& x) {
    const int i = x[0], j = x[1], k = x[2], l = x[3];
    const double nnnn = n[i] * n[j] * n[k] * n[l];
    const double nnd = n[i] * n[j] * kd(k, l) + n[i] * n[k] * kd(j, l) + n[i] * n[l] * kd(j, k) +
                       n[j] * n[k] * kd(i, l) + n[j] * n[l] * kd(i, k) + n[k] * n[l] * kd(i, j);
    const double dd = kd(i, j) * kd(k, l) + kd(i, k) * kd(j, l) + kd(i, l) * kd(j, k);
    return s4 * nnnn + c2 * nnd + c0 * dd;
  });
}

DirectorContext makeDirectorContext(const Vec3& n, const PhaseConstants& constants, const SphereQuadrature* quad) {
  if (std::abs(norm(n) - 1.0) > 1e-12) throw std::invalid_argument("director must be a unit vector");
  DirectorContext ctx;
  ctx.n = n;
  ctx.constants = constants;
  ctx.moments.q = QTensor::uniaxial(constants.s2, n);
  ctx.moments.B = QTensor::uniaxial(constants.eta, n);
  ctx.moments.m4 = equilibriumM4(n, constants.s2, constants.s4);
  if (quad) {
    const BinghamMoments m = momentsOf(ctx.moments.B, *quad);
    ctx.moments.m6 = m.m6;
    ctx.moments.log_z = m.log_z;
    ctx.moments.z = m.z;
    ctx.has_m6 = true;
  }
  return ctx;
}

QTensor applyQn(const DirectorContext& ctx, const QTensor& q) {
  const PhaseConstants& c = ctx.constants;
  return threeTerm(ctx.n, q, c.xi1, c.xi2, c.xi3);
}

QTensor applyQnInverse(const DirectorContext& ctx, const QTensor& q) {
  const PhaseConstants& c = ctx.constants;
  return threeTerm(ctx.n, q, c.psi1, c.psi2, c.psi3);
}

QTensor applyHn(const DirectorContext& ctx, const QTensor& q) {
  const PhaseConstants& c = ctx.constants;
  return threeTerm(ctx.n, q, c.psi1, c.psi2, -c.psi2);
}

QTensor projectIn(const Vec3& n, const QTensor& q) {
  const Mat3 nn = Mat3::outer(n, n);
  const Mat3 qm = q.matrix();
  return QTensor::fromMatrix(nn * qm + qm * nn - (2.0 * ddot(qm, nn)) * nn);
}

QTensor projectOut(const Vec3& n, const QTensor& q) { return q - projectIn(n, q); }

std::array<QTensor, 2> inBasis(const Vec3& n) {
  const auto [m1, m2] = transverse(n);
  const double r = 1.0 / std::sqrt(2.0);
  return {symOuter(n, m1, r), symOuter(n, m2, r)};
}

std::array<QTensor, 3> outBasis(const Vec3& n) {
  const auto [m1, m2] = transverse(n);
  const double r = 1.0 / std::sqrt(2.0);
  const QTensor axis = std::sqrt(1.5) * QTensor::uniaxial(1.0, n);
  const QTensor plus = QTensor::fromMatrix(r * (Mat3::outer(m1, m1) - Mat3::outer(m2, m2)));
  return {axis, plus, symOuter(m1, m2, r)};
}

QTensor applyJ(const BinghamMoments& moments, const Mat3& a) {
  Mat3 r = (1.0 / 3.0) * a;
  r += moments.q.matrix() * a;
  r -= contract42(moments.m4, a);
  return QTensor::fromMatrix(r);
}

Tensor4Sym applyU(const BinghamMoments& moments, const QTensor& b) {
  Tensor4Sym r = contract64(moments.m6, b.matrix());
  Tensor4Sym m4 = moments.m4;
  m4 *= -moments.q.dot(b);
  r += m4;
  return r;
}

double coercivityConstant(const DirectorContext& ctx) {
  const auto basis = outBasis(ctx.n);
  std::array<std::array<double, 3>, 3> h{};
  for (int a = 0; a < 3; ++a) {
    const QTensor ha = applyHn(ctx, basis[a]);
    for (int b = 0; b < 3; ++b) h[a][b] = ha.dot(basis[b]);
  }
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) h[a][b] = h[b][a] = 0.5 * (h[a][b] + h[b][a]);
  return jacobiEigen<3>(h).values[0];
}

BetaCoefficients betaCoefficients(const PhaseConstants& c) {
  BetaCoefficients b;
  const double x1 = c.xi1, x2 = c.xi2, x3 = c.xi3, a = c.alpha;
  b.beta1 = x1 - a * (2.0 / 3.0 * (x1 + 2.0 * x2) * (x1 + 2.0 * x2) - 2.0 * x2 * x2 + 2.0 * x2 * x3);
  b.beta2 = 2.0 * x2 - a * (2.0 * x2 * x2 + 4.0 * x2 * x3);
  b.beta3 = x3 - a * x3 * x3;
  const double a0 = c.a0, a2 = c.a2, a4 = c.a4;
  b.closed_form_margin =
      9.0 * (a0 * a4 - a2 * a2) * (3.0 * a2 * a2 + 2.0 * a0 * a2 - 5.0 * a0 * a4) / (8.0 * a0 * a0 * a0 * (a2 - a4));
  b.boundary_case = std::abs(b.beta1 - 2.0 * b.beta3) <= 1e-14 * (std::abs(b.beta1) + std::abs(b.beta3));
  return b;
}

}  // namespace qlc
