#pragma once

// Inversion of the Bingham moment map Q(B) = <mm> - I/3 and the closure
// operator M_Q(A) = A/3 + Q.A - A:M4.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

#include "qlc/sphere.hpp"
#include "qlc/tensor.hpp"

namespace qlc {

inline constexpr double kDefaultClosureTol = 1e-11;
inline constexpr int kDefaultClosureMaxIter = 50;

/// Raised when Newton does not reach the tolerance.
class ClosureError : public std::runtime_error {
 public:
  ClosureError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct ClosureSolveReport {
  QTensor B;
  double residual = 0.0;
  int iterations = 0;
  bool used_damping = false;
};

/// Everything a solve produces in the common eigenframe of Q and B.
struct ClosurePoint {
  EigenFrame frame;  ///< eigenframe of the target Q (ascending eigenvalues)
  Vec3 b{};          ///< eigenvalues of B in that frame
  DiagonalMoments moments;
  double residual = 0.0;
  int iterations = 0;
  bool used_damping = false;

  QTensor B() const;
  /// Q(B) rebuilt from the second moments.
  QTensor Q() const;
  double logZ() const { return moments.log_z; }
};

/// Solves Q(B) = q for B. Throws std::domain_error when q is not physical
/// with margin delta, ClosureError on non-convergence. The optional hint is
/// an approximate B (for instance from a neighbouring point or time step);
/// it only changes the starting point, never the answer beyond tol.
ClosurePoint solveClosure(const QTensor& q, double delta, double tol, const SphereQuadrature& quad,
                          const std::optional<QTensor>& hint = std::nullopt,
                          int max_iter = kDefaultClosureMaxIter);

ClosureSolveReport binghamMap(const QTensor& q, double delta, double tol = kDefaultClosureTol,
                              const SphereQuadrature& quad = defaultQuadrature());

/// 5x5 matrix of <grad_B Q(B) E_b, E_a> in the basis qBasis().
using ClosureJacobian = std::array<std::array<double, 5>, 5>;
ClosureJacobian closureJacobian(const QTensor& b, const SphereQuadrature& quad);
double smallestEigenvalue(const ClosureJacobian& j);

/// M_Q(A) = A/3 + Q.A - A:M4 with Q and M4 taken from the moments.
Mat3 applyMQ(const BinghamMoments& moments, const Mat3& a);
/// Same operator evaluated in the eigenframe of a solved closure point.
Mat3 applyMQ(const ClosurePoint& point, const Mat3& a);
/// (A : M4)_ij = M4_ijkl A_kl at a solved closure point.
Mat3 contractM4(const ClosurePoint& point, const Mat3& a);
/// A : M4 : A for the moments of a solved closure point.
double quadFormM4(const ClosurePoint& point, const Mat3& a);

/// Upper bound for b_max - b_min of any B_Q with Q physical at margin delta.
double spreadBound(double delta);

struct SpreadBoundParts {
  double meas_u = 0.0;
  double meas_v = 0.0;
  double lambda = 0.0;
};
SpreadBoundParts spreadBoundParts(double delta);

}  // namespace qlc
