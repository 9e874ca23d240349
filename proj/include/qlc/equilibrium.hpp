#pragma once

// Uniaxial critical points of the Bingham bulk energy, order parameters and
// the derived Leslie and Frank coefficients.

#include <stdexcept>
#include <string>

namespace qlc {

enum class Branch { Isotropic, Stable, Unstable };

class BranchMissing : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Residual of the critical-point equation in the form
/// 3 / J(eta) - (3 + 2 eta + 4 eta^2 / alpha), with J(eta) = int_0^1 exp(eta (x^2 - 1)) dx.
double criticalResidual(double eta, double alpha);
/// d/d eta of criticalResidual.
double criticalResidualDeta(double eta, double alpha);

/// Root of the critical-point equation on the requested branch.
/// Stable is the larger nonzero root, Unstable the smaller one (which is
/// negative for alpha > 7.5). Throws BranchMissing when alpha <= alpha*.
double solveEta(double alpha, Branch branch);

struct CriticalPoint {
  double alpha = 0.0;
  double eta = 0.0;
};
/// Fold point where the two nonzero roots coalesce.
CriticalPoint criticalAlpha(double tol = 1e-10);

struct OrderParameters {
  double a0 = 0, a2 = 0, a4 = 0, a6 = 0;  ///< A_k scaled by exp(-max(eta, 0))
  double s2 = 0, s4 = 0;
};
OrderParameters orderParameters(double eta);

struct PhaseConstants {
  double alpha = 0.0;
  double eta = 0.0;
  double a0 = 0, a2 = 0, a4 = 0, a6 = 0;  ///< scaled by exp(-eta); only ratios matter
  double s2 = 0, s4 = 0;
  double xi1 = 0, xi2 = 0, xi3 = 0;
  double psi1 = 0, psi2 = 0, psi3 = 0;
  double alpha1 = 0, alpha2 = 0, alpha3 = 0, alpha4 = 0, alpha5 = 0, alpha6 = 0;
  double gamma1 = 0, gamma2 = 0, zeta = 0;
  double L1 = 0, L2 = 0;
  double k1 = 0, k2 = 0, k3 = 0, k4 = 0;
};

/// Throws std::invalid_argument unless L1 > 0 and L1 + 2 L2 > 0, and
/// BranchMissing when alpha <= alpha*.
PhaseConstants phaseConstants(double alpha, double L1, double L2);

/// Closed-form inverse of the linear map with coefficients (xi1, xi2, xi3).
void psiFromXi(double xi1, double xi2, double xi3, double& psi1, double& psi2, double& psi3);

}  // namespace qlc
