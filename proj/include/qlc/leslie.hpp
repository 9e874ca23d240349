#pragma once

// Homogeneous Ericksen-Leslie director dynamics and the small-Deborah
// comparison against the Q-tensor model.

#include <optional>
#include <string>
#include <vector>

#include "qlc/dynamics.hpp"
#include "qlc/equilibrium.hpp"

namespace qlc {

struct DirectorState {
  Vec3 n{1.0, 0.0, 0.0};
  double t = 0.0;
};

/// dn/dt = W.n + zeta (D.n - (n.D.n) n), W and D the skew and symmetric parts of kappa.
Vec3 directorRhs(const Vec3& n, const Mat3& kappa, double zeta);
/// RK4 step followed by renormalization.
DirectorState stepDirector(const DirectorState& s, double dt, const Mat3& kappa, double zeta);

/// Stable alignment angle in simple shear; empty for tumbling materials (zeta < 1).
std::optional<double> leslieAngle(double zeta);

struct DirectorSample {
  Vec3 n{};
  bool flagged = false;  ///< top eigenvalue gap below 1e-8
};
/// Principal eigenvector of q with its sign chosen to agree with prev.
DirectorSample extractDirector(const QTensor& q, const std::optional<Vec3>& prev = std::nullopt);

/// arccos |a.b|, the angle modulo n -> -n.
double directorAngle(const Vec3& a, const Vec3& b);

/// Velocity gradient of the simple shear v = (rate y, 0, 0).
Mat3 simpleShear(double rate);

struct ConvergenceRow {
  double De = 0.0;
  double sup_angle_err = 0.0;
  double sup_biaxiality = 0.0;
  double fitted_slope_running = 0.0;  ///< NaN for the first row
  bool ok = true;
  std::string error;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double slope = 0.0;  ///< least-squares log-log slope over the successful rows
};

struct SmallDeOptions {
  double t_final = 5.0;
  double dt_factor = 0.02;  ///< Q steps use dt = dt_factor * De
  Vec3 n0{0.8, 0.5, 0.3};
};

/// Runs the homogeneous Q model at each De and compares its director with the
/// Leslie ODE (same zeta, same n0). Q starts at S2 (n0 n0 - I/3).
ConvergenceTable smallDeExperiment(const ModelParams& base, const std::vector<double>& de_list, const Mat3& kappa,
                                   const SmallDeOptions& opts, const SphereQuadrature& quad);

/// Least-squares slope of log y against log x.
double logLogSlope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qlc
