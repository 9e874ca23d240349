#pragma once

// Linearization of the bulk operator around the uniaxial equilibrium
// Q0 = S2 (nn - I/3) and the J / U operators of a general closure state.

#include <array>
#include <optional>

#include "qlc/equilibrium.hpp"
#include "qlc/sphere.hpp"
#include "qlc/tensor.hpp"

namespace qlc {

/// Fourth moment of the equilibrium density with director n.
Tensor4Sym equilibriumM4(const Vec3& n, double s2, double s4);

struct DirectorContext {
  Vec3 n{};
  PhaseConstants constants;
  /// Q0, closed-form M4; M6 filled only when a quadrature was supplied.
  BinghamMoments moments;
  bool has_m6 = false;
};

/// Throws std::invalid_argument when |n| differs from 1 by more than 1e-12.
DirectorContext makeDirectorContext(const Vec3& n, const PhaseConstants& constants,
                                    const SphereQuadrature* quad = nullptr);

QTensor applyQn(const DirectorContext& ctx, const QTensor& q);
QTensor applyQnInverse(const DirectorContext& ctx, const QTensor& q);
QTensor applyHn(const DirectorContext& ctx, const QTensor& q);

QTensor projectIn(const Vec3& n, const QTensor& q);
QTensor projectOut(const Vec3& n, const QTensor& q);

/// Orthonormal bases of the in-space {n m + m n} and of its complement.
std::array<QTensor, 2> inBasis(const Vec3& n);
std::array<QTensor, 3> outBasis(const Vec3& n);

/// Symmetric part of M_Q(A); always symmetric and traceless.
QTensor applyJ(const BinghamMoments& moments, const Mat3& a);
/// M6 : B - (Q : B) M4.
Tensor4Sym applyU(const BinghamMoments& moments, const QTensor& b);

/// Smallest Rayleigh quotient <H_n Q, Q> / |Q|^2 over the out-space.
double coercivityConstant(const DirectorContext& ctx);

struct BetaCoefficients {
  double beta1 = 0, beta2 = 0, beta3 = 0;
  /// beta1 - beta3 / 2 from the A_k closed form.
  double closed_form_margin = 0;
  bool boundary_case = false;  ///< beta1 == 2 beta3 to rounding
};
BetaCoefficients betaCoefficients(const PhaseConstants& c);

}  // namespace qlc
