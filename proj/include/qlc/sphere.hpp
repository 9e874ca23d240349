#pragma once

// Quadrature on the unit sphere and moments of Bingham densities
// f(m) = exp(m m : B) / Z(B).

#include <array>
#include <vector>

#include "qlc/tensor.hpp"

namespace qlc {

/// Largest admissible spread lambda_max(B) - lambda_min(B) of a Bingham exponent.
inline constexpr double kExponentBudget = 300.0;

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
GaussRule gaussLegendre(int n);

/// Product rule: Gauss-Legendre in cos(theta) times the midpoint trapezoid
/// in phi. Also carries the same rule folded onto the positive octant in the
/// squared components (m1^2, m2^2, m3^2), which is exact for integrands that
/// are even in every coordinate.
struct SphereQuadrature {
  int n_polar = 0;
  int n_azimuthal = 0;
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  std::vector<Vec3> folded_squares;
  std::vector<double> folded_weights;

  std::size_t size() const { return nodes.size(); }
  /// Highest total degree of spherical polynomials integrated exactly.
  int exactDegree() const { return std::min(2 * n_polar - 1, n_azimuthal - 1); }
};

/// Throws std::invalid_argument unless n_polar >= 8, n_azimuthal >= 16 and even.
SphereQuadrature buildQuadrature(int n_polar, int n_azimuthal);
/// Shared (64, 128) rule.
const SphereQuadrature& defaultQuadrature();

struct BinghamMoments {
  QTensor B;
  double log_z = 0.0;  ///< ln Z(B)
  double z = 0.0;      ///< Z(B); may be +inf for very large exponents, use log_z
  QTensor q;           ///< int (m m - I/3) f dm
  Tensor4Sym m4;       ///< int m m m m f dm
  Tensor6Sym m6;       ///< int m m m m m m f dm
};

/// Single quadrature sweep for Z, Q(B), M4 and M6. Throws std::range_error
/// when the eigenvalue spread of B exceeds kExponentBudget.
BinghamMoments momentsOf(const QTensor& b, const SphereQuadrature& quad);

/// omega(B) = ln int exp(m m : B) dm.
double logPartition(const QTensor& b, const SphereQuadrature& quad);

/// Moments of a Bingham density whose exponent is diagonal, diag(b), in the
/// frame where it is diagonal: second[i] = <m_i^2>, fourth[i][j] = <m_i^2 m_j^2>.
/// All off-diagonal moments vanish by symmetry.
struct DiagonalMoments {
  double log_z = 0.0;
  Vec3 second{};
  std::array<std::array<double, 3>, 3> fourth{};
};

DiagonalMoments diagonalMoments(const Vec3& b, const SphereQuadrature& quad);

/// A_k(eta) = int_{-1}^{1} x^k exp(eta x^2) dx for even k <= 6 (200-point
/// Gauss-Legendre). Throws std::range_error for |eta| > kExponentBudget.
double axisymmetricAk(double eta, int k);

/// A_k(eta) * exp(-max(eta, 0)); ratios of A_k are computed from these.
double axisymmetricAkScaled(double eta, int k);

}  // namespace qlc
