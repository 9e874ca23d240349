#pragma once

// Pseudo-spectral tools on the periodic square [0, 2 pi)^2 with full
// three-component tensors and vectors (no dependence on z).

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "qlc/tensor.hpp"

namespace qlc {

using RealField = std::vector<double>;
using SpecField = std::vector<std::complex<double>>;
/// Q field stored by component (q11, q22, q12, q13, q23).
using QField = std::array<RealField, 5>;
using VecField = std::array<RealField, 3>;

class Grid2D {
 public:
  explicit Grid2D(int n);
  ~Grid2D();
  Grid2D(const Grid2D&) = delete;
  Grid2D& operator=(const Grid2D&) = delete;

  int n() const { return n_; }
  int nkx() const { return n_ / 2 + 1; }
  std::size_t realSize() const { return static_cast<std::size_t>(n_) * n_; }
  std::size_t specSize() const { return static_cast<std::size_t>(n_) * nkx(); }
  double length() const;
  double spacing() const { return length() / n_; }
  double cellArea() const { return spacing() * spacing(); }
  double x(std::size_t p) const { return spacing() * static_cast<double>(p % n_); }
  double y(std::size_t p) const { return spacing() * static_cast<double>(p / n_); }

  /// Integer wavenumbers of spectral slot m.
  int kx(std::size_t m) const { return static_cast<int>(m % nkx()); }
  int ky(std::size_t m) const {
    const int iy = static_cast<int>(m / nkx());
    return iy <= n_ / 2 ? iy : iy - n_;
  }
  /// Largest wavenumber kept by the 2/3 rule.
  int cutoff() const { return n_ / 3; }
  bool kept(std::size_t m) const;
  bool nyquist(std::size_t m) const { return kx(m) == n_ / 2 || ky(m) == n_ / 2; }

  RealField zeroReal() const { return RealField(realSize(), 0.0); }
  SpecField zeroSpec() const { return SpecField(specSize(), 0.0); }

  void forward(const RealField& in, SpecField& out) const;
  /// Normalized inverse; the input is left untouched.
  void inverse(const SpecField& in, RealField& out) const;
  /// d/dx (dir 0) or d/dy (dir 1) in spectral space.
  void derivative(const SpecField& in, SpecField& out, int dir) const;
  void truncate(SpecField& f) const;
  /// Spectral derivative of a real field.
  RealField derivative(const RealField& f, int dir) const;
  double integrate(const RealField& f) const;

 private:
  int n_;
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
  double* real_buf_ = nullptr;
  void* spec_buf_ = nullptr;
};

/// Moves a field between grids by Fourier truncation or zero padding; modes
/// at either Nyquist frequency are dropped.
RealField resample(const RealField& f, const Grid2D& from, const Grid2D& to);

QField zeroQField(const Grid2D& g);
VecField zeroVecField(const Grid2D& g);
QTensor qAt(const QField& q, std::size_t p);
void setQ(QField& q, std::size_t p, const QTensor& v);

/// grad[c][d] = d/dx_d of component c (d = 0, 1).
using QGradient = std::array<std::array<RealField, 2>, 5>;
QGradient gradient(const QField& q, const Grid2D& g);

/// Full gradient tensor G[j][k][l] = d_j Q_kl at point p (d_z = 0).
using PointGradient = std::array<std::array<std::array<double, 3>, 3>, 3>;
PointGradient pointGradient(const QGradient& grad, std::size_t p);

/// L(Q) = -(L1 Lap Q + L2 (Q_ik,jk + Q_jk,ik)), detraced.
QField ellOperator(const QField& q, const Grid2D& g, double L1, double L2);

/// sigma(j, i) = -(L1 Q_kl,j Qt_kl,i + L2 Q_km,m Qt_kj,i + L2 Q_kj,l Qt_kl,i).
Mat3 distortionStressAt(const PointGradient& gq, const PointGradient& gqt, double L1, double L2);
/// Per-point stress fields, entry [3 j + i] holds sigma(j, i).
std::array<RealField, 9> distortionStress(const QField& q, const QField& qt, const Grid2D& g, double L1, double L2);

/// Elastic energy density without the epsilon factor:
/// (L1 |grad Q|^2 + L2 (Q_ik,i Q_jk,j + Q_jk,i Q_ik,j)) / 2.
double elasticDensityAt(const PointGradient& gq, double L1, double L2);
double elasticEnergy(const QField& q, const Grid2D& g, double L1, double L2);

struct FrankConstants {
  double k1 = 0, k2 = 0, k3 = 0, k4 = 0;
};
/// Oseen-Frank energy of a unit director field including the saddle-splay
/// (k2 + k4) divergence term. Throws std::invalid_argument on non-unit input.
double oseenFrankEnergy(const VecField& n, const FrankConstants& k, const Grid2D& g);

}  // namespace qlc
