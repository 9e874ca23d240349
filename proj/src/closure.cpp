#include "qlc/closure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qlc {

namespace {

Mat3 diagonal(const Vec3& d) {
  Mat3 m;
  m(0, 0) = d[0];
  m(1, 1) = d[1];
  m(2, 2) = d[2];
  return m;
}

double spreadOf(const Vec3& b) { return std::max({b[0], b[1], b[2]}) - std::min({b[0], b[1], b[2]}); }

Vec3 centered(const Vec3& b) {
  const double m = (b[0] + b[1] + b[2]) / 3.0;
  return {b[0] - m, b[1] - m, b[2] - m};
}

double objective(const Vec3& b, const Vec3& target, double log_z) {
  return b[0] * target[0] + b[1] * target[1] + b[2] * target[2] - log_z;
}

double residualOf(const DiagonalMoments& m, const Vec3& target) {
  const double r0 = m.second[0] - target[0], r1 = m.second[1] - target[1], r2 = m.second[2] - target[2];
  return std::sqrt(r0 * r0 + r1 * r1 + r2 * r2);
}

}  // namespace

QTensor ClosurePoint::B() const { return QTensor::fromMatrix(conjugate(frame.vectors, diagonal(b))); }

QTensor ClosurePoint::Q() const {
  const Vec3 q = centered(moments.second);
  return QTensor::fromMatrix(conjugate(frame.vectors, diagonal(q)));
}

ClosurePoint solveClosure(const QTensor& q, double delta, double tol, const SphereQuadrature& quad,
                          const std::optional<QTensor>& hint, int max_iter) {
  ClosurePoint p;
  p.frame = eigenDecompose(q);
  const Vec3& lam = p.frame.values;
  if (!(lam[0] >= -1.0 / 3.0 + delta && lam[2] <= 2.0 / 3.0 - delta)) {
    std::ostringstream os;
    os << "Q is outside the physical set (eigenvalues " << lam[0] << ", " << lam[1] << ", " << lam[2]
       << " must lie in [-1/3 + " << delta << ", 2/3 - " << delta << "])";
    throw std::domain_error(os.str());
  }
  const Vec3 target{lam[0] + 1.0 / 3.0, lam[1] + 1.0 / 3.0, lam[2] + 1.0 / 3.0};

  Vec3 b{5.0 * lam[0], 5.0 * lam[1], 5.0 * lam[2]};
  if (hint) {
    const Mat3 h = conjugate(p.frame.vectors.transpose(), hint->matrix());
    const Vec3 hb = centered({h(0, 0), h(1, 1), h(2, 2)});
    if (std::isfinite(hb[0]) && std::isfinite(hb[1]) && std::isfinite(hb[2])) b = hb;
  }
  const double s0 = spreadOf(b);
  if (s0 > 0.9 * kExponentBudget) b = (0.9 * kExponentBudget / s0) * b;

  DiagonalMoments m = diagonalMoments(b, quad);
  double res = residualOf(m, target);
  double obj = objective(b, target, m.log_z);
  int it = 0;
  while (res > tol) {
    if (it >= max_iter) {
      std::ostringstream os;
      os << "closure Newton did not converge in " << max_iter << " iterations (residual " << res << ")";
      throw ClosureError(os.str(), res);
    }
    ++it;
    // Newton ascent on the concave objective along (1,0,-1) and (0,1,-1).
    const Vec3 g3{target[0] - m.second[0], target[1] - m.second[1], target[2] - m.second[2]};
    double cov[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) cov[i][j] = m.fourth[i][j] - m.second[i] * m.second[j];
    const double g0 = g3[0] - g3[2], g1 = g3[1] - g3[2];
    const double h00 = cov[0][0] - 2.0 * cov[0][2] + cov[2][2];
    const double h11 = cov[1][1] - 2.0 * cov[1][2] + cov[2][2];
    const double h01 = cov[0][1] - cov[0][2] - cov[1][2] + cov[2][2];
    const double det = h00 * h11 - h01 * h01;
    double d0, d1;
    if (det > 1e-300 && h00 > 0.0) {
      d0 = (h11 * g0 - h01 * g1) / det;
      d1 = (h00 * g1 - h01 * g0) / det;
    } else {
      d0 = g0;
      d1 = g1;
    }
    const Vec3 step{d0, d1, -d0 - d1};

    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      Vec3 trial = b + t * step;
      trial = centered(trial);
      if (spreadOf(trial) <= kExponentBudget) {
        const DiagonalMoments mt = diagonalMoments(trial, quad);
        const double ot = objective(trial, target, mt.log_z);
        const double rt = residualOf(mt, target);
        if (ot >= obj - 1e-14 * (1.0 + std::abs(obj)) || rt < res) {
          b = trial;
          m = mt;
          obj = ot;
          res = rt;
          accepted = true;
          break;
        }
      }
      t *= 0.5;
      p.used_damping = true;
    }
    if (!accepted) {
      std::ostringstream os;
      os << "closure line search stalled (residual " << res << ")";
      throw ClosureError(os.str(), res);
    }
  }
  p.b = b;
  p.moments = m;
  p.residual = res;
  p.iterations = it;
  return p;
}

ClosureSolveReport binghamMap(const QTensor& q, double delta, double tol, const SphereQuadrature& quad) {
  const ClosurePoint p = solveClosure(q, delta, tol, quad);
  return {p.B(), p.residual, p.iterations, p.used_damping};
}

ClosureJacobian closureJacobian(const QTensor& b, const SphereQuadrature& quad) {
  const BinghamMoments m = momentsOf(b, quad);
  const auto& basis = qBasis();
  std::array<Mat3, 5> e;
  std::array<double, 5> qe{};
  for (int a = 0; a < 5; ++a) {
    e[a] = basis[a].matrix();
    qe[a] = m.q.dot(basis[a]);
  }
  ClosureJacobian j{};
  for (int a = 0; a < 5; ++a)
    for (int c = a; c < 5; ++c) j[a][c] = j[c][a] = quadForm4(m.m4, e[a], e[c]) - qe[a] * qe[c];
  return j;
}

double smallestEigenvalue(const ClosureJacobian& j) { return jacobiEigen<5>(j).values[0]; }

Mat3 applyMQ(const BinghamMoments& moments, const Mat3& a) {
  Mat3 r = (1.0 / 3.0) * a;
  r += moments.q.matrix() * a;
  r -= contract42(moments.m4, a);
  return r;
}

Mat3 contractM4(const ClosurePoint& point, const Mat3& a) {
  const Mat3& rot = point.frame.vectors;
  const Mat3 ap = rot.transpose() * a * rot;
  const auto& c = point.moments.fourth;
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = i == j ? c[i][0] * ap(0, 0) + c[i][1] * ap(1, 1) + c[i][2] * ap(2, 2) : c[i][j] * (ap(i, j) + ap(j, i));
  return rot * r * rot.transpose();
}

Mat3 applyMQ(const ClosurePoint& point, const Mat3& a) {
  const Mat3& rot = point.frame.vectors;
  const Mat3 ap = rot.transpose() * a * rot;
  const auto& c = point.moments.fourth;
  const Vec3& s = point.moments.second;
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    const double qi = s[i] - 1.0 / 3.0;
    for (int j = 0; j < 3; ++j) {
      const double m4 =
          i == j ? c[i][0] * ap(0, 0) + c[i][1] * ap(1, 1) + c[i][2] * ap(2, 2) : c[i][j] * (ap(i, j) + ap(j, i));
      r(i, j) = ap(i, j) / 3.0 + qi * ap(i, j) - m4;
    }
  }
  return rot * r * rot.transpose();
}

double quadFormM4(const ClosurePoint& point, const Mat3& a) {
  const Mat3& rot = point.frame.vectors;
  const Mat3 ap = rot.transpose() * a * rot;
  const auto& c = point.moments.fourth;
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) {
        s += ap(i, i) * (c[i][0] * ap(0, 0) + c[i][1] * ap(1, 1) + c[i][2] * ap(2, 2));
      } else {
        s += ap(i, j) * c[i][j] * (ap(i, j) + ap(j, i));
      }
    }
  return s;
}

SpreadBoundParts spreadBoundParts(double delta) {
  if (!(delta > 0.0 && delta < 1.0 / 3.0)) throw std::invalid_argument("spread bound needs delta in (0, 1/3)");
  SpreadBoundParts out;
  out.meas_v = 4.0 * std::numbers::pi * (1.0 - std::sqrt(delta / 2.0));
  // Band |m3| < sqrt(delta/8) intersected with |m2| < sqrt(delta/4), integrated in m3.
  const double c = std::sqrt(delta / 8.0);
  const double a = std::sqrt(delta / 4.0);
  const GaussRule gl = gaussLegendre(64);
  double u = 0.0;
  for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
    const double x = c * gl.nodes[k];
    const double ratio = std::min(1.0, a / std::sqrt(1.0 - x * x));
    u += c * gl.weights[k] * 4.0 * std::asin(ratio);
  }
  out.meas_u = u;
  out.lambda = (4.0 / delta) * std::log(2.0 * out.meas_v / (delta * out.meas_u));
  return out;
}

double spreadBound(double delta) { return spreadBoundParts(delta).lambda; }

}  // namespace qlc
