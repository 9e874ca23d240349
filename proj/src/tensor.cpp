#include "qlc/tensor.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qlc {

Vec3 normalized(const Vec3& a) {
  const double n = norm(a);
  if (n == 0.0) throw std::invalid_argument("cannot normalize a zero vector");
  return (1.0 / n) * a;
}

Mat3 Mat3::identity() {
  Mat3 m;
  m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
  return m;
}

Mat3 Mat3::outer(const Vec3& u, const Vec3& v) {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = u[i] * v[j];
  return m;
}

Mat3 Mat3::fromColumns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
  Mat3 m;
  for (int i = 0; i < 3; ++i) {
    m(i, 0) = c0[i];
    m(i, 1) = c1[i];
    m(i, 2) = c2[i];
  }
  return m;
}

Mat3 Mat3::transpose() const {
  Mat3 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t(i, j) = (*this)(j, i);
  return t;
}

double Mat3::frobenius() const { return std::sqrt(ddot(*this, *this)); }

Mat3 Mat3::sym() const {
  Mat3 s;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
  return s;
}

Mat3 Mat3::skew() const {
  Mat3 s;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s(i, j) = 0.5 * ((*this)(i, j) - (*this)(j, i));
  return s;
}

Mat3& Mat3::operator+=(const Mat3& o) {
  for (int k = 0; k < 9; ++k) a[k] += o.a[k];
  return *this;
}
Mat3& Mat3::operator-=(const Mat3& o) {
  for (int k = 0; k < 9; ++k) a[k] -= o.a[k];
  return *this;
}
Mat3& Mat3::operator*=(double s) {
  for (double& x : a) x *= s;
  return *this;
}

Mat3 operator+(Mat3 x, const Mat3& y) { return x += y; }
Mat3 operator-(Mat3 x, const Mat3& y) { return x -= y; }
Mat3 operator*(double s, Mat3 x) { return x *= s; }

Mat3 operator*(const Mat3& x, const Mat3& y) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = x(i, 0) * y(0, j) + x(i, 1) * y(1, j) + x(i, 2) * y(2, j);
  return r;
}

Vec3 operator*(const Mat3& x, const Vec3& v) {
  return {x(0, 0) * v[0] + x(0, 1) * v[1] + x(0, 2) * v[2], x(1, 0) * v[0] + x(1, 1) * v[1] + x(1, 2) * v[2],
          x(2, 0) * v[0] + x(2, 1) * v[1] + x(2, 2) * v[2]};
}

double ddot(const Mat3& x, const Mat3& y) {
  double s = 0.0;
  for (int k = 0; k < 9; ++k) s += x.a[k] * y.a[k];
  return s;
}

Mat3 conjugate(const Mat3& r, const Mat3& x) { return r * x * r.transpose(); }

// ---------------------------------------------------------------------------

QTensor QTensor::fromComponents(double q11, double q22, double q12, double q13, double q23) {
  const std::array<double, 5> c{q11, q22, q12, q13, q23};
  for (double v : c)
    if (!std::isfinite(v)) throw std::invalid_argument("QTensor component is not finite");
  return QTensor(c);
}

QTensor QTensor::fromComponents(std::span<const double, 5> c) {
  return fromComponents(c[0], c[1], c[2], c[3], c[4]);
}

QTensor QTensor::fromMatrix(const Mat3& x) {
  const double t = x.trace() / 3.0;
  return fromComponents(x(0, 0) - t, x(1, 1) - t, 0.5 * (x(0, 1) + x(1, 0)), 0.5 * (x(0, 2) + x(2, 0)),
                        0.5 * (x(1, 2) + x(2, 1)));
}

QTensor QTensor::uniaxial(double s, const Vec3& n) {
  Mat3 m = Mat3::outer(n, n);
  m -= (1.0 / 3.0) * Mat3::identity();
  return fromMatrix(s * m);
}

double QTensor::operator()(int i, int j) const {
  if (i > j) std::swap(i, j);
  switch (3 * i + j) {
    case 0: return c_[0];
    case 1: return c_[2];
    case 2: return c_[3];
    case 4: return c_[1];
    case 5: return c_[4];
    default: return -c_[0] - c_[1];
  }
}

Mat3 QTensor::matrix() const {
  Mat3 m;
  m(0, 0) = c_[0];
  m(1, 1) = c_[1];
  m(2, 2) = -c_[0] - c_[1];
  m(0, 1) = m(1, 0) = c_[2];
  m(0, 2) = m(2, 0) = c_[3];
  m(1, 2) = m(2, 1) = c_[4];
  return m;
}

double QTensor::dot(const QTensor& o) const {
  const double q33 = -c_[0] - c_[1];
  const double p33 = -o.c_[0] - o.c_[1];
  return c_[0] * o.c_[0] + c_[1] * o.c_[1] + q33 * p33 + 2.0 * (c_[2] * o.c_[2] + c_[3] * o.c_[3] + c_[4] * o.c_[4]);
}

QTensor& QTensor::operator+=(const QTensor& o) {
  for (int k = 0; k < 5; ++k) c_[k] += o.c_[k];
  return *this;
}
QTensor& QTensor::operator-=(const QTensor& o) {
  for (int k = 0; k < 5; ++k) c_[k] -= o.c_[k];
  return *this;
}
QTensor& QTensor::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

QTensor operator+(QTensor x, const QTensor& y) { return x += y; }
QTensor operator-(QTensor x, const QTensor& y) { return x -= y; }
QTensor operator*(double s, QTensor x) { return x *= s; }

const std::array<QTensor, 5>& qBasis() {
  static const std::array<QTensor, 5> basis = [] {
    const double r2 = 1.0 / std::sqrt(2.0), r6 = 1.0 / std::sqrt(6.0);
    return std::array<QTensor, 5>{
        QTensor::fromComponents(r2, -r2, 0, 0, 0), QTensor::fromComponents(r6, r6, 0, 0, 0),
        QTensor::fromComponents(0, 0, r2, 0, 0), QTensor::fromComponents(0, 0, 0, r2, 0),
        QTensor::fromComponents(0, 0, 0, 0, r2)};
  }();
  return basis;
}

// ---------------------------------------------------------------------------

EigenFrame eigenJacobi(const Mat3& x) {
  std::array<std::array<double, 3>, 3> a{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = 0.5 * (x(i, j) + x(j, i));
  const auto e = jacobiEigen<3>(a);
  EigenFrame f;
  f.values = {e.values[0], e.values[1], e.values[2]};
  Vec3 v0{e.vectors[0][0], e.vectors[1][0], e.vectors[2][0]};
  Vec3 v2{e.vectors[0][2], e.vectors[1][2], e.vectors[2][2]};
  v0 = normalized(v0);
  v2 = normalized(v2 - dot(v2, v0) * v0);
  const Vec3 v1 = cross(v2, v0);
  f.vectors = Mat3::fromColumns(v0, v1, v2);
  return f;
}

namespace {

// Null vector of the symmetric, rank-2 matrix m via the largest row cross product.
bool nullVector(const Mat3& m, Vec3& out) {
  const Vec3 r0{m(0, 0), m(0, 1), m(0, 2)}, r1{m(1, 0), m(1, 1), m(1, 2)}, r2{m(2, 0), m(2, 1), m(2, 2)};
  const Vec3 c[3] = {cross(r0, r1), cross(r0, r2), cross(r1, r2)};
  int best = 0;
  double bn = dot(c[0], c[0]);
  for (int k = 1; k < 3; ++k) {
    const double nk = dot(c[k], c[k]);
    if (nk > bn) {
      bn = nk;
      best = k;
    }
  }
  if (!(bn > 0.0)) return false;
  out = (1.0 / std::sqrt(bn)) * c[best];
  return true;
}

}  // namespace

EigenFrame eigenSymmetric(const Mat3& x) {
  const Mat3 s = x.sym();
  const double q = s.trace() / 3.0;
  Mat3 d = s - q * Mat3::identity();
  const double p2 = ddot(d, d) / 6.0;
  EigenFrame f;
  if (p2 <= 0.0) {
    f.values = {q, q, q};
    f.vectors = Mat3::identity();
    return f;
  }
  const double p = std::sqrt(p2);
  const Mat3 bm = (1.0 / p) * d;
  const double det = bm(0, 0) * (bm(1, 1) * bm(2, 2) - bm(1, 2) * bm(2, 1)) -
                     bm(0, 1) * (bm(1, 0) * bm(2, 2) - bm(1, 2) * bm(2, 0)) +
                     bm(0, 2) * (bm(1, 0) * bm(2, 1) - bm(1, 1) * bm(2, 0));
  const double r = std::clamp(0.5 * det, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double top = q + 2.0 * p * std::cos(phi);
  const double bottom = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double mid = 3.0 * q - top - bottom;

  const double spread = top - bottom;
  const double gap = std::min(top - mid, mid - bottom);
  if (gap < 1e-4 * spread) return eigenJacobi(s);

  Vec3 v0, v2;
  if (!nullVector(s - bottom * Mat3::identity(), v0) || !nullVector(s - top * Mat3::identity(), v2))
    return eigenJacobi(s);
  v2 = normalized(v2 - dot(v2, v0) * v0);
  const Vec3 v1 = cross(v2, v0);
  f.values = {bottom, mid, top};
  f.vectors = Mat3::fromColumns(v0, v1, v2);
  return f;
}

EigenFrame eigenDecompose(const QTensor& q) {
  EigenFrame f = eigenSymmetric(q.matrix());
  // Traceless by construction; remove rounding in the sum.
  const double shift = (f.values[0] + f.values[1] + f.values[2]) / 3.0;
  for (double& v : f.values) v -= shift;
  return f;
}

bool isPhysical(const QTensor& q, double delta) {
  const EigenFrame f = eigenDecompose(q);
  return f.values[0] >= -1.0 / 3.0 + delta && f.values[2] <= 2.0 / 3.0 - delta;
}

double physicalMargin(const QTensor& q) {
  const EigenFrame f = eigenDecompose(q);
  return std::min(f.values[0] + 1.0 / 3.0, 2.0 / 3.0 - f.values[2]);
}

double biaxiality(const QTensor& q) {
  const Mat3 m = q.matrix();
  const double tr2 = ddot(m, m);
  if (tr2 <= std::numeric_limits<double>::min()) return 0.0;
  const double tr3 = ddot(m * m, m);
  const double b = 1.0 - 6.0 * tr3 * tr3 / (tr2 * tr2 * tr2);
  return std::clamp(b, 0.0, 1.0);
}

// ---------------------------------------------------------------------------

namespace {

template <int N>
std::array<int, N> representative(int n0, int n1) {
  std::array<int, N> idx{};
  int k = 0;
  for (int i = 0; i < n0; ++i) idx[k++] = 0;
  for (int i = 0; i < n1; ++i) idx[k++] = 1;
  while (k < N) idx[k++] = 2;
  return idx;
}

}  // namespace

Mat3 contract42(const Tensor4Sym& m, const Mat3& a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) s += m(i, j, k, l) * a(k, l);
      r(i, j) = r(j, i) = s;
    }
  return r;
}

Tensor4Sym contract64(const Tensor6Sym& m, const Mat3& b) {
  Tensor4Sym r;
  for (int n0 = 0; n0 <= 4; ++n0)
    for (int n1 = 0; n0 + n1 <= 4; ++n1) {
      const auto idx = representative<4>(n0, n1);
      double s = 0.0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) s += m(idx[0], idx[1], idx[2], idx[3], k, l) * b(k, l);
      r.data[Tensor4Sym::slot(n0, n1)] = s;
    }
  return r;
}

double quadForm4(const Tensor4Sym& m, const Mat3& a, const Mat3& c) { return ddot(a, contract42(m, c)); }

Mat3 partialTrace(const Tensor4Sym& m) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = m(i, j, 0, 0) + m(i, j, 1, 1) + m(i, j, 2, 2);
  return r;
}

Tensor4Sym partialTrace(const Tensor6Sym& m) {
  Tensor4Sym r;
  for (int n0 = 0; n0 <= 4; ++n0)
    for (int n1 = 0; n0 + n1 <= 4; ++n1) {
      const auto idx = representative<4>(n0, n1);
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += m(idx[0], idx[1], idx[2], idx[3], k, k);
      r.data[Tensor4Sym::slot(n0, n1)] = s;
    }
  return r;
}

Tensor4Sym isotropicTensor4() {
  Tensor4Sym r;
  auto d = [](int i, int j) { return i == j ? 1.0 : 0.0; };
  for (int n0 = 0; n0 <= 4; ++n0)
    for (int n1 = 0; n0 + n1 <= 4; ++n1) {
      const auto x = representative<4>(n0, n1);
      r.data[Tensor4Sym::slot(n0, n1)] =
          d(x[0], x[1]) * d(x[2], x[3]) + d(x[0], x[2]) * d(x[1], x[3]) + d(x[0], x[3]) * d(x[1], x[2]);
    }
  return r;
}

Tensor4Sym rotate(const Tensor4Sym& m, const Mat3& r) {
  // Two-stage contraction through a dense intermediate.
  double full[81];
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) full[((a * 3 + b) * 3 + c) * 3 + d] = m(a, b, c, d);
  double tmp[81];
  for (int pass = 0; pass < 4; ++pass) {
    // Rotate the leading index and cycle it to the back.
    for (int i = 0; i < 3; ++i)
      for (int rest = 0; rest < 27; ++rest) {
        double s = 0.0;
        for (int a = 0; a < 3; ++a) s += r(i, a) * full[a * 27 + rest];
        tmp[rest * 3 + i] = s;
      }
    std::copy(tmp, tmp + 81, full);
  }
  Tensor4Sym out;
  for (int n0 = 0; n0 <= 4; ++n0)
    for (int n1 = 0; n0 + n1 <= 4; ++n1) {
      const auto x = representative<4>(n0, n1);
      out.data[Tensor4Sym::slot(n0, n1)] = full[((x[0] * 3 + x[1]) * 3 + x[2]) * 3 + x[3]];
    }
  return out;
}

double maxAbsDiff(const Tensor4Sym& a, const Tensor4Sym& b) {
  double m = 0.0;
  for (int k = 0; k < Tensor4Sym::kSize; ++k) m = std::max(m, std::abs(a.data[k] - b.data[k]));
  return m;
}

Mat3 randomRotation(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  double w, x, y, z, r;
  do {
    w = nd(rng);
    x = nd(rng);
    y = nd(rng);
    z = nd(rng);
    r = std::sqrt(w * w + x * x + y * y + z * z);
  } while (r < 1e-8);
  w /= r;
  x /= r;
  y /= r;
  z /= r;
  Mat3 m;
  m(0, 0) = 1 - 2 * (y * y + z * z);
  m(0, 1) = 2 * (x * y - z * w);
  m(0, 2) = 2 * (x * z + y * w);
  m(1, 0) = 2 * (x * y + z * w);
  m(1, 1) = 1 - 2 * (x * x + z * z);
  m(1, 2) = 2 * (y * z - x * w);
  m(2, 0) = 2 * (x * z - y * w);
  m(2, 1) = 2 * (y * z + x * w);
  m(2, 2) = 1 - 2 * (x * x + y * y);
  return m;
}

QTensor samplePhysicalQ(std::mt19937_64& rng, double delta) {
  const double lo = -1.0 / 3.0 + delta, hi = 2.0 / 3.0 - delta;
  if (!(lo < 0.0 && hi > 0.0)) throw std::invalid_argument("margin leaves no physical Q");
  std::uniform_real_distribution<double> u(lo, hi);
  double l0, l1, l2;
  do {
    l0 = u(rng);
    l1 = u(rng);
    l2 = -l0 - l1;
  } while (l2 <= lo || l2 >= hi);
  Mat3 d;
  d(0, 0) = l0;
  d(1, 1) = l1;
  d(2, 2) = l2;
  return QTensor::fromMatrix(conjugate(randomRotation(rng), d));
}

}  // namespace qlc
