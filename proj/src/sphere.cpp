#include "qlc/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qlc {

GaussRule gaussLegendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre rule needs at least one node");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

SphereQuadrature buildQuadrature(int n_polar, int n_azimuthal) {
  if (n_polar < 8 || n_azimuthal < 16 || n_azimuthal % 2 != 0)
    throw std::invalid_argument("sphere quadrature needs n_polar >= 8 and even n_azimuthal >= 16 (got " +
                                std::to_string(n_polar) + ", " + std::to_string(n_azimuthal) + ")");
  SphereQuadrature q;
  q.n_polar = n_polar;
  q.n_azimuthal = n_azimuthal;
  const GaussRule gl = gaussLegendre(n_polar);
  const double dphi = 2.0 * std::numbers::pi / n_azimuthal;

  // Nodes related by m_i -> -m_i share squared components: polar index i
  // pairs with n_polar - 1 - i, azimuthal j with n - 1 - j, n/2 - 1 - j, n/2 + j.
  std::map<std::pair<int, int>, std::size_t> classes;
  q.nodes.reserve(static_cast<std::size_t>(n_polar) * n_azimuthal);
  for (int i = 0; i < n_polar; ++i) {
    const double x = gl.nodes[i];
    const double r = std::sqrt(std::max(0.0, 1.0 - x * x));
    for (int j = 0; j < n_azimuthal; ++j) {
      const double phi = (j + 0.5) * dphi;
      const Vec3 m{r * std::cos(phi), r * std::sin(phi), x};
      const double w = gl.weights[i] * dphi;
      q.nodes.push_back(m);
      q.weights.push_back(w);

      const int ic = std::min(i, n_polar - 1 - i);
      const int half = n_azimuthal / 2;
      const int jc = std::min({j, n_azimuthal - 1 - j, ((half - 1 - j) % n_azimuthal + n_azimuthal) % n_azimuthal,
                               (half + j) % n_azimuthal});
      auto [it, inserted] = classes.try_emplace({ic, jc}, q.folded_weights.size());
      if (inserted) {
        q.folded_squares.push_back({m[0] * m[0], m[1] * m[1], m[2] * m[2]});
        q.folded_weights.push_back(0.0);
      }
      q.folded_weights[it->second] += w;
    }
  }
  return q;
}

const SphereQuadrature& defaultQuadrature() {
  static const SphereQuadrature quad = buildQuadrature(64, 128);
  return quad;
}

namespace {

void checkBudget(double spread) {
  if (!(spread <= kExponentBudget))
    throw std::range_error("Bingham exponent spread " + std::to_string(spread) + " exceeds the budget " +
                           std::to_string(kExponentBudget));
}

}  // namespace

BinghamMoments momentsOf(const QTensor& b, const SphereQuadrature& quad) {
  const EigenFrame frame = eigenDecompose(b);
  checkBudget(frame.values[2] - frame.values[0]);
  const double shift = frame.values[2];
  const Mat3 bm = b.matrix();

  double z = 0.0;
  Mat3 second;
  Tensor4Sym m4;
  Tensor6Sym m6;
  for (std::size_t k = 0; k < quad.size(); ++k) {
    const Vec3& m = quad.nodes[k];
    const double e = quad.weights[k] * std::exp(dot(m, bm * m) - shift);
    z += e;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) second(i, j) += e * m[i] * m[j];
    double p0[7], p1[7], p2[7];
    p0[0] = p1[0] = p2[0] = 1.0;
    for (int n = 1; n <= 6; ++n) {
      p0[n] = p0[n - 1] * m[0];
      p1[n] = p1[n - 1] * m[1];
      p2[n] = p2[n - 1] * m[2];
    }
    for (int n0 = 0; n0 <= 4; ++n0)
      for (int n1 = 0; n0 + n1 <= 4; ++n1) m4.data[Tensor4Sym::slot(n0, n1)] += e * p0[n0] * p1[n1] * p2[4 - n0 - n1];
    for (int n0 = 0; n0 <= 6; ++n0)
      for (int n1 = 0; n0 + n1 <= 6; ++n1) m6.data[Tensor6Sym::slot(n0, n1)] += e * p0[n0] * p1[n1] * p2[6 - n0 - n1];
  }
  BinghamMoments out;
  out.B = b;
  out.log_z = shift + std::log(z);
  out.z = std::exp(out.log_z);
  second *= 1.0 / z;
  out.q = QTensor::fromMatrix(second);
  m4 *= 1.0 / z;
  m6 *= 1.0 / z;
  out.m4 = m4;
  out.m6 = m6;
  return out;
}

double logPartition(const QTensor& b, const SphereQuadrature& quad) {
  const EigenFrame frame = eigenDecompose(b);
  checkBudget(frame.values[2] - frame.values[0]);
  const double shift = frame.values[2];
  const Mat3 bm = b.matrix();
  double z = 0.0;
  for (std::size_t k = 0; k < quad.size(); ++k) {
    const Vec3& m = quad.nodes[k];
    z += quad.weights[k] * std::exp(dot(m, bm * m) - shift);
  }
  return shift + std::log(z);
}

DiagonalMoments diagonalMoments(const Vec3& b, const SphereQuadrature& quad) {
  const double hi = std::max({b[0], b[1], b[2]});
  const double lo = std::min({b[0], b[1], b[2]});
  checkBudget(hi - lo);
  double z = 0.0, s0 = 0.0, s1 = 0.0, s2 = 0.0;
  double c00 = 0.0, c11 = 0.0, c22 = 0.0, c01 = 0.0, c02 = 0.0, c12 = 0.0;
  const std::size_t n = quad.folded_weights.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& s = quad.folded_squares[k];
    const double e = quad.folded_weights[k] * std::exp(b[0] * s[0] + b[1] * s[1] + b[2] * s[2] - hi);
    z += e;
    const double e0 = e * s[0], e1 = e * s[1], e2 = e * s[2];
    s0 += e0;
    s1 += e1;
    s2 += e2;
    c00 += e0 * s[0];
    c11 += e1 * s[1];
    c22 += e2 * s[2];
    c01 += e0 * s[1];
    c02 += e0 * s[2];
    c12 += e1 * s[2];
  }
  DiagonalMoments out;
  out.log_z = hi + std::log(z);
  const double iz = 1.0 / z;
  out.second = {s0 * iz, s1 * iz, s2 * iz};
  out.fourth = {{{c00 * iz, c01 * iz, c02 * iz}, {c01 * iz, c11 * iz, c12 * iz}, {c02 * iz, c12 * iz, c22 * iz}}};
  return out;
}

namespace {

const GaussRule& akRule() {
  static const GaussRule rule = gaussLegendre(200);
  return rule;
}

}  // namespace

double axisymmetricAkScaled(double eta, int k) {
  if (k < 0 || k > 6 || k % 2 != 0) throw std::invalid_argument("A_k defined here for even k <= 6");
  checkBudget(std::abs(eta));
  const GaussRule& rule = akRule();
  const double shift = std::max(eta, 0.0);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i];
    const double x2 = x * x;
    s += rule.weights[i] * std::pow(x2, k / 2) * std::exp(eta * x2 - shift);
  }
  return s;
}

double axisymmetricAk(double eta, int k) { return axisymmetricAkScaled(eta, k) * std::exp(std::max(eta, 0.0)); }

}  // namespace qlc
