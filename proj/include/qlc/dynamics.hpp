#pragma once

// Q-tensor / flow dynamics: the spatially homogeneous model under an imposed
// velocity gradient and the 2D-periodic pseudo-spectral field solver.
//
// Conventions: kappa_ij = d_j v_i; the closure coupling enters as
// 2 J(kappa^T); stresses are differentiated on their first index,
// (div tau)_i = d_j tau_ji.

#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlc/closure.hpp"
#include "qlc/spectral.hpp"

namespace qlc {

struct ModelParams {
  double alpha = 8.0;
  double epsilon = 0.05;
  double De = 1.0;
  double Re = 1.0;
  double gamma = 0.5;
  double L1 = 1.0;
  double L2 = 0.5;
  double delta = 0.1;

  /// Human-readable violations; empty when valid.
  std::vector<std::string> violations() const;
  /// Throws std::invalid_argument listing every violation.
  void validate() const;
};

class PhysicalityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symmetric part of M_Q(A) at a solved closure point.
QTensor applyJ(const ClosurePoint& point, const Mat3& a);

struct HomState {
  QTensor Q;
  Mat3 kappa;
  double t = 0.0;
};

/// dQ/dt = -(4/De) J(B_Q - alpha Q) + 2 J(kappa^T).
QTensor homogeneousRhs(const HomState& s, const ModelParams& p, const SphereQuadrature& quad);

/// One RK4 step; halves dt (up to 10 times) when the margin delta/2 is lost.
HomState stepHomogeneous(const HomState& s, double dt, const ModelParams& p, const SphereQuadrature& quad);

struct FieldState {
  QField q;
  VecField v;
  double t = 0.0;
};

struct EnergyReport {
  double kinetic = 0.0;
  double bulk = 0.0;     ///< F_b
  double elastic = 0.0;  ///< F_e including epsilon
  double total = 0.0;    ///< kinetic + (1 - gamma)/(Re De) (F_b + F_e)
  double diss_viscous = 0.0;
  double diss_closure = 0.0;
  double diss_rotational = 0.0;
  double min_margin = 0.0;  ///< smallest physicality margin over the grid

  double dissipation() const { return diss_viscous + diss_closure + diss_rotational; }
};

/// mu = B_Q - alpha Q + epsilon L(Q) at every grid point.
QField muQ(const QField& q, const ModelParams& p, const SphereQuadrature& quad, const Grid2D& g);

using Forcing = std::function<void(double t, QField& fq, VecField& fv)>;

struct FieldOptions {
  int quad_polar = 24;
  int quad_azimuthal = 48;
  double closure_tol = kDefaultClosureTol;
  /// Optional body forcing added to both equations (manufactured solutions).
  Forcing forcing;
};

class FieldSolver {
 public:
  FieldSolver(const Grid2D& grid, const ModelParams& params, FieldOptions options = {});

  /// Sets the state after projecting v and truncating to the 2/3 band; clears history.
  void setState(const FieldState& s);
  const FieldState& state() const { return state_; }
  const Grid2D& grid() const { return grid_; }
  const ModelParams& params() const { return params_; }

  /// Advances by dt with SBDF2 (IMEX Euler on the first step after a reset).
  /// Returns the energy report of the state at the beginning of the step.
  EnergyReport step(double dt);
  /// Energy report of the current state.
  EnergyReport energy();
  /// Full right-hand side of the semi-discrete system at a given state
  /// (including forcing at time t), in grid space.
  void rhs(const FieldState& s, QField& fq, VecField& fv);

  int halvings() const { return halvings_total_; }
  /// max_k |k . v_k| over the Fourier amplitudes, divided by max(1, max_k |v_k|).
  double divergenceResidual() const;

 private:
  struct Eval {
    std::array<SpecField, 5> fq;  // explicit part, spectral
    std::array<SpecField, 3> fv;
    EnergyReport energy;
  };
  Eval evaluate(const FieldState& s, bool with_forcing);
  void project(std::array<SpecField, 3>& v) const;
  void advance(double dt);
  double implicitQ(std::size_t m) const;
  double implicitV(std::size_t m) const;

  const Grid2D& grid_;
  ModelParams params_;
  FieldOptions options_;
  SphereQuadrature quad_;
  FieldState state_;
  std::vector<QTensor> b_now_, b_prev_;
  bool have_b_prev_ = false;
  double cbar_ = 0.0;

  std::optional<FieldState> prev_state_;
  std::optional<Eval> prev_eval_;
  double prev_dt_ = 0.0;
  EnergyReport last_energy_;
  int halvings_total_ = 0;
};

/// Smooth random periodic scalar built from Fourier modes with |k_x|, |k_y| <= kmax,
/// scaled so its largest absolute value equals amplitude.
RealField randomSmoothField(const Grid2D& g, std::mt19937_64& rng, int kmax, double amplitude);
/// Unit director field from smooth random polar and azimuthal angles.
VecField randomSmoothDirector(const Grid2D& g, std::mt19937_64& rng, int kmax, double angle_amplitude);
/// Uniaxial Q = s (nn - I/3) from a random smooth director, plus a smooth
/// divergence-free in-plane velocity and a smooth out-of-plane component,
/// each with maximum size v_amp.
FieldState randomSmoothState(const Grid2D& g, double s, double v_amp, std::uint64_t seed, int kmax = 2);

/// Engineering default min(0.25 dx / |v|_max, 0.1 De).
double defaultTimeStep(const FieldState& s, const Grid2D& g, const ModelParams& p);

/// Binary snapshot: "QLCFIELD", uint32 version, nx, ny, ncomp = 8, float64
/// t, Lx, Ly, then component-major data (q11 q22 q12 q13 q23 v1 v2 v3),
/// little-endian.
void writeSnapshot(const std::string& path, const FieldState& s, const Grid2D& g);
FieldState readSnapshot(const std::string& path, int& n);

}  // namespace qlc
