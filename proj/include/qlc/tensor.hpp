#pragma once

// Small fixed-size tensor algebra: 3-vectors, 3x3 matrices, symmetric
// traceless Q-tensors (5 stored components), fully symmetric 4th/6th order
// tensors, and a symmetric 3x3 eigensolver.

#include <array>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <utility>

namespace qlc {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
Vec3 normalized(const Vec3& a);

/// Dense 3x3 matrix, row-major.
struct Mat3 {
  std::array<double, 9> a{};

  double& operator()(int i, int j) { return a[3 * i + j]; }
  double operator()(int i, int j) const { return a[3 * i + j]; }

  static Mat3 zero() { return {}; }
  static Mat3 identity();
  static Mat3 outer(const Vec3& u, const Vec3& v);
  /// Matrix whose columns are c0, c1, c2.
  static Mat3 fromColumns(const Vec3& c0, const Vec3& c1, const Vec3& c2);

  Vec3 column(int j) const { return {a[j], a[3 + j], a[6 + j]}; }
  Mat3 transpose() const;
  double trace() const { return a[0] + a[4] + a[8]; }
  double frobenius() const;
  Mat3 sym() const;
  Mat3 skew() const;

  Mat3& operator+=(const Mat3& o);
  Mat3& operator-=(const Mat3& o);
  Mat3& operator*=(double s);
};

Mat3 operator+(Mat3 x, const Mat3& y);
Mat3 operator-(Mat3 x, const Mat3& y);
Mat3 operator*(double s, Mat3 x);
Mat3 operator*(const Mat3& x, const Mat3& y);
Vec3 operator*(const Mat3& x, const Vec3& v);
/// Double contraction A:B = A_ij B_ij.
double ddot(const Mat3& x, const Mat3& y);
/// R X R^T.
Mat3 conjugate(const Mat3& r, const Mat3& x);

/// Element of the 5-dimensional space of symmetric traceless 3x3 tensors.
/// Stored as (q11, q22, q12, q13, q23); q33 = -q11 - q22.
class QTensor {
 public:
  QTensor() = default;

  /// Throws std::invalid_argument on non-finite input.
  static QTensor fromComponents(double q11, double q22, double q12, double q13, double q23);
  static QTensor fromComponents(std::span<const double, 5> c);
  /// Orthogonal projection onto symmetric traceless tensors: sym(X) - tr(X)/3 I.
  static QTensor fromMatrix(const Mat3& x);
  /// s (n n - I/3) for a unit vector n.
  static QTensor uniaxial(double s, const Vec3& n);

  const std::array<double, 5>& components() const { return c_; }
  double operator[](int k) const { return c_[k]; }
  double operator()(int i, int j) const;
  Mat3 matrix() const;

  /// Frobenius inner product Q:P over all nine entries.
  double dot(const QTensor& o) const;
  double norm() const { return std::sqrt(dot(*this)); }

  QTensor& operator+=(const QTensor& o);
  QTensor& operator-=(const QTensor& o);
  QTensor& operator*=(double s);

 private:
  explicit QTensor(const std::array<double, 5>& c) : c_(c) {}
  std::array<double, 5> c_{};
};

QTensor operator+(QTensor x, const QTensor& y);
QTensor operator-(QTensor x, const QTensor& y);
QTensor operator*(double s, QTensor x);

/// Orthonormal basis of the symmetric traceless space under the Frobenius product.
const std::array<QTensor, 5>& qBasis();

struct EigenFrame {
  Vec3 values{};   ///< ascending
  Mat3 vectors{};  ///< column k belongs to values[k]; right-handed
};

/// Symmetric 3x3 eigen-decomposition. Closed form (trigonometric Cardano on
/// the shifted characteristic polynomial) with a cyclic Jacobi fallback
/// when two eigenvalues are closer than 1e-4 relative to the spread.
EigenFrame eigenSymmetric(const Mat3& x);
EigenFrame eigenDecompose(const QTensor& q);
/// Cyclic Jacobi, used as the fallback and as an independent reference.
EigenFrame eigenJacobi(const Mat3& x);

/// True iff every eigenvalue lies in [-1/3 + delta, 2/3 - delta].
bool isPhysical(const QTensor& q, double delta);
/// Largest delta for which isPhysical holds (negative when unphysical).
double physicalMargin(const QTensor& q);

/// Uniformly distributed rotation (Haar measure).
Mat3 randomRotation(std::mt19937_64& rng);
/// Random Q whose eigenvalues are uniform on the triples with margin delta,
/// in a uniformly random eigenframe.
QTensor samplePhysicalQ(std::mt19937_64& rng, double delta);

/// 1 - 6 (tr Q^3)^2 / (tr Q^2)^3; zero for uniaxial Q, defined as 0 for Q = 0.
double biaxiality(const QTensor& q);

/// Fully symmetric tensor of order N in three dimensions, stored by unique
/// component. A component is identified by how many of its indices equal
/// 0, 1 and 2.
template <int N>
class SymTensor {
 public:
  static constexpr int kSize = (N + 1) * (N + 2) / 2;

  /// Unique slot for an index multiset with n0 zeros and n1 ones.
  static constexpr int slot(int n0, int n1) {
    // Enumerate n0 descending, then n1 descending.
    int base = 0;
    for (int a = N; a > n0; --a) base += N - a + 1;
    return base + (N - n0 - n1);
  }

  template <class... I>
  double operator()(I... idx) const {
    static_assert(sizeof...(I) == N);
    return data[slotOf({static_cast<int>(idx)...})];
  }
  template <class... I>
  double& operator()(I... idx) {
    static_assert(sizeof...(I) == N);
    return data[slotOf({static_cast<int>(idx)...})];
  }

  static int slotOf(const std::array<int, N>& idx) {
    int n[3] = {0, 0, 0};
    for (int i : idx) ++n[i];
    return slot(n[0], n[1]);
  }

  SymTensor& operator+=(const SymTensor& o) {
    for (int k = 0; k < kSize; ++k) data[k] += o.data[k];
    return *this;
  }
  SymTensor& operator*=(double s) {
    for (double& d : data) d *= s;
    return *this;
  }

  std::array<double, kSize> data{};
};

using Tensor4Sym = SymTensor<4>;
using Tensor6Sym = SymTensor<6>;

/// Fills every unique component from f(idx) evaluated at one sorted index tuple.
template <int N, class F>
SymTensor<N> symTensorFrom(F f) {
  SymTensor<N> t;
  for (int n0 = 0; n0 <= N; ++n0)
    for (int n1 = 0; n0 + n1 <= N; ++n1) {
      std::array<int, N> idx{};
      int k = 0;
      for (int i = 0; i < n0; ++i) idx[k++] = 0;
      for (int i = 0; i < n1; ++i) idx[k++] = 1;
      while (k < N) idx[k++] = 2;
      t.data[SymTensor<N>::slot(n0, n1)] = f(idx);
    }
  return t;
}

/// (M : A)_ij = M_ijkl A_kl.
Mat3 contract42(const Tensor4Sym& m, const Mat3& a);
/// (M : B)_ijkl = M_ijklmn B_mn.
Tensor4Sym contract64(const Tensor6Sym& m, const Mat3& b);
/// A : M : C = A_ij M_ijkl C_kl.
double quadForm4(const Tensor4Sym& m, const Mat3& a, const Mat3& c);
/// Partial trace M_ijkk.
Mat3 partialTrace(const Tensor4Sym& m);
/// Partial trace M_ijklmm.
Tensor4Sym partialTrace(const Tensor6Sym& m);
/// (d_ij d_kl + d_ik d_jl + d_il d_jk).
Tensor4Sym isotropicTensor4();
/// R_ia R_jb R_kc R_ld M_abcd.
Tensor4Sym rotate(const Tensor4Sym& m, const Mat3& r);
double maxAbsDiff(const Tensor4Sym& a, const Tensor4Sym& b);

/// Eigen-decomposition of a small dense symmetric matrix by cyclic Jacobi
/// sweeps. Values ascending; vectors stored by column.
template <std::size_t N>
struct SymEigen {
  std::array<double, N> values{};
  std::array<std::array<double, N>, N> vectors{};
};

template <std::size_t N>
SymEigen<N> jacobiEigen(std::array<std::array<double, N>, N> a) {
  SymEigen<N> out;
  auto& v = out.vectors;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) v[i][j] = (i == j) ? 1.0 : 0.0;

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      diag += a[i][i] * a[i][i];
      for (std::size_t j = i + 1; j < N; ++j) off += a[i][j] * a[i][j];
    }
    if (off <= 1e-34 * diag || off == 0.0) break;
    for (std::size_t p = 0; p < N; ++p) {
      for (std::size_t q = p + 1; q < N; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < N; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < N; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < N; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::array<std::size_t, N> order{};
  for (std::size_t i = 0; i < N; ++i) order[i] = i;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j)
      if (a[order[j]][order[j]] < a[order[i]][order[i]]) std::swap(order[i], order[j]);
  SymEigen<N> sorted;
  for (std::size_t i = 0; i < N; ++i) {
    sorted.values[i] = a[order[i]][order[i]];
    for (std::size_t k = 0; k < N; ++k) sorted.vectors[k][i] = v[k][order[i]];
  }
  return sorted;
}

}  // namespace qlc
