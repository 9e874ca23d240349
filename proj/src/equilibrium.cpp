#include "qlc/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qlc/sphere.hpp"

namespace qlc {

namespace {

// J(eta) = int_0^1 exp(eta (x^2 - 1)) dx and its first two eta-derivatives.
struct JValues {
  double j, dj, d2j;
};

JValues jValues(double eta) {
  const double a0 = axisymmetricAkScaled(eta, 0);
  const double a2 = axisymmetricAkScaled(eta, 2);
  const double a4 = axisymmetricAkScaled(eta, 4);
  // Scaled values carry exp(-max(eta, 0)); J needs exp(-eta).
  const double f = eta >= 0.0 ? 0.5 : 0.5 * std::exp(-eta);
  return {f * a0, f * (a2 - a0), f * (a4 - 2.0 * a2 + a0)};
}

double residualSecond(double eta, double alpha) {
  const JValues v = jValues(eta);
  return 3.0 * (2.0 * v.dj * v.dj / (v.j * v.j * v.j) - v.d2j / (v.j * v.j)) - 8.0 / alpha;
}

constexpr double kScanStep = 0.25;
constexpr double kScanMax = 60.0;

// Root of criticalResidual in [lo, hi] given a sign change; bisection with Newton steps.
double refineRoot(double lo, double hi, double alpha) {
  double flo = criticalResidual(lo, alpha);
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double fx = criticalResidual(x, alpha);
    if (fx == 0.0) return x;
    if ((fx > 0) == (flo > 0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    const double d = criticalResidualDeta(x, alpha);
    double next = x - fx / d;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-15 * std::max(1.0, std::abs(x)) || hi - lo < 1e-15 * std::max(1.0, std::abs(x))) {
      return next;
    }
    x = next;
  }
  return x;
}

}  // namespace

double criticalResidual(double eta, double alpha) {
  const JValues v = jValues(eta);
  return 3.0 / v.j - 3.0 - 2.0 * eta - 4.0 * eta * eta / alpha;
}

double criticalResidualDeta(double eta, double alpha) {
  const JValues v = jValues(eta);
  return -3.0 * v.dj / (v.j * v.j) - 2.0 - 8.0 * eta / alpha;
}

CriticalPoint criticalAlpha(double tol) {
  // alpha(eta) = 4 eta^2 / (3/J - 3 - 2 eta) traces the nonzero roots; its
  // minimum is the fold. Coarse scan, then Newton on the tangency system.
  auto alphaOf = [](double eta) {
    const JValues v = jValues(eta);
    return 4.0 * eta * eta / (3.0 / v.j - 3.0 - 2.0 * eta);
  };
  double best_eta = kScanStep, best_alpha = alphaOf(kScanStep);
  for (double eta = kScanStep; eta <= kScanMax; eta += kScanStep) {
    const double a = alphaOf(eta);
    if (a > 0 && a < best_alpha) {
      best_alpha = a;
      best_eta = eta;
    }
  }
  double eta = best_eta, alpha = best_alpha;
  for (int it = 0; it < 100; ++it) {
    const double f1 = criticalResidual(eta, alpha);
    const double f2 = criticalResidualDeta(eta, alpha);
    const double j11 = f2, j12 = 4.0 * eta * eta / (alpha * alpha);
    const double j21 = residualSecond(eta, alpha), j22 = 8.0 * eta / (alpha * alpha);
    const double det = j11 * j22 - j12 * j21;
    const double de = (f1 * j22 - j12 * f2) / det;
    const double da = (j11 * f2 - j21 * f1) / det;
    eta -= de;
    alpha -= da;
    if (std::abs(de) < 1e-15 * eta && std::abs(da) < 1e-15 * alpha) break;
    if (std::abs(f1) < 0.01 * tol && std::abs(f2) < 0.01 * tol && std::abs(de) < 1e-13 * eta) break;
  }
  return {alpha, eta};
}

double solveEta(double alpha, Branch branch) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (branch == Branch::Isotropic) return 0.0;
  static const CriticalPoint fold = criticalAlpha();
  if (alpha <= fold.alpha)
    throw BranchMissing("no nematic branch for alpha = " + std::to_string(alpha) + " (alpha* = " +
                        std::to_string(fold.alpha) + ")");
  if (branch == Branch::Stable) {
    double lo = fold.eta;
    for (double hi = fold.eta + kScanStep; hi <= kExponentBudget; hi += kScanStep) {
      if (criticalResidual(hi, alpha) <= 0.0) return refineRoot(lo, hi, alpha);
      lo = hi;
    }
    throw BranchMissing("stable root beyond the exponent budget for alpha = " + std::to_string(alpha));
  }
  if (alpha == 7.5) return 0.0;
  if (alpha < 7.5) {
    double hi = fold.eta;
    for (double lo = fold.eta - kScanStep;; lo -= kScanStep) {
      lo = std::max(lo, 1e-3 * fold.eta);
      if (criticalResidual(lo, alpha) <= 0.0) return refineRoot(lo, hi, alpha);
      if (lo <= 1e-3 * fold.eta) break;
      hi = lo;
    }
    throw BranchMissing("unstable root too close to zero for alpha = " + std::to_string(alpha));
  }
  double hi = -1e-3;
  if (criticalResidual(hi, alpha) <= 0.0) throw BranchMissing("unstable root too close to zero");
  for (double lo = -kScanStep; lo >= -kExponentBudget; lo -= kScanStep) {
    if (criticalResidual(lo, alpha) <= 0.0) return refineRoot(lo, hi, alpha);
    hi = lo;
  }
  throw BranchMissing("unstable root not found for alpha = " + std::to_string(alpha));
}

OrderParameters orderParameters(double eta) {
  OrderParameters o;
  o.a0 = axisymmetricAkScaled(eta, 0);
  o.a2 = axisymmetricAkScaled(eta, 2);
  o.a4 = axisymmetricAkScaled(eta, 4);
  o.a6 = axisymmetricAkScaled(eta, 6);
  o.s2 = (3.0 * o.a2 - o.a0) / (2.0 * o.a0);
  o.s4 = (35.0 * o.a4 - 30.0 * o.a2 + 3.0 * o.a0) / (8.0 * o.a0);
  return o;
}

void psiFromXi(double xi1, double xi2, double xi3, double& psi1, double& psi2, double& psi3) {
  // Eigenvalues on span{nn - I/3}, the in-space and the transverse plane.
  const double lam_axis = 2.0 / 3.0 * xi1 + 4.0 / 3.0 * xi2 + xi3;
  psi3 = 1.0 / xi3;
  psi2 = -psi3 * xi2 / (xi2 + xi3);
  psi1 = 1.5 * (1.0 / lam_axis - 4.0 / 3.0 * psi2 - psi3);
}

PhaseConstants phaseConstants(double alpha, double L1, double L2) {
  if (!(L1 > 0.0) || !(L1 + 2.0 * L2 > 0.0))
    throw std::invalid_argument("elastic constants need L1 > 0 and L1 + 2 L2 > 0");
  PhaseConstants c;
  c.alpha = alpha;
  c.eta = solveEta(alpha, Branch::Stable);
  const OrderParameters o = orderParameters(c.eta);
  c.a0 = o.a0;
  c.a2 = o.a2;
  c.a4 = o.a4;
  c.a6 = o.a6;
  c.s2 = o.s2;
  c.s4 = o.s4;
  const double s2 = c.s2, s4 = c.s4;
  c.xi1 = s4 - s2 * s2;
  c.xi2 = 2.0 * (s2 - s4) / 7.0;
  c.xi3 = 2.0 * (s4 / 35.0 - 2.0 * s2 / 21.0 + 1.0 / 15.0);
  psiFromXi(c.xi1, c.xi2, c.xi3, c.psi1, c.psi2, c.psi3);

  c.zeta = 1.0 / 3.0 + 2.0 / (3.0 * s2) - 2.0 / (s2 * alpha);
  c.gamma1 = 1.0 / (1.0 / (3.0 * s2) + 2.0 / (3.0 * s2 * s2) - 2.0 / (s2 * s2 * alpha));
  c.gamma2 = -s2;
  c.alpha1 = -s4 / 2.0;
  c.alpha2 = -s2 / 2.0 * (1.0 + 1.0 / c.zeta);
  c.alpha3 = -s2 / 2.0 * (1.0 - 1.0 / c.zeta);
  c.alpha4 = 4.0 / 15.0 - 5.0 / 21.0 * s2 - s4 / 35.0;
  c.alpha5 = s4 / 7.0 + 6.0 / 7.0 * s2;
  c.alpha6 = s4 / 7.0 - s2 / 7.0;

  c.L1 = L1;
  c.L2 = L2;
  c.k1 = c.k3 = 2.0 * (L1 + L2) * s2 * s2;
  c.k2 = 2.0 * L1 * s2 * s2;
  c.k4 = L2 * s2 * s2;
  return c;
}

}  // namespace qlc
