#include "qlc/leslie.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qlc {

Vec3 directorRhs(const Vec3& n, const Mat3& kappa, double zeta) {
  const Mat3 w = kappa.skew();
  const Mat3 d = kappa.sym();
  const Vec3 dn = d * n;
  return w * n + zeta * (dn - dot(n, dn) * n);
}

DirectorState stepDirector(const DirectorState& s, double dt, const Mat3& kappa, double zeta) {
  const Vec3 k1 = directorRhs(s.n, kappa, zeta);
  const Vec3 k2 = directorRhs(s.n + (0.5 * dt) * k1, kappa, zeta);
  const Vec3 k3 = directorRhs(s.n + (0.5 * dt) * k2, kappa, zeta);
  const Vec3 k4 = directorRhs(s.n + dt * k3, kappa, zeta);
  DirectorState out;
  out.n = normalized(s.n + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  out.t = s.t + dt;
  return out;
}

std::optional<double> leslieAngle(double zeta) {
  if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be positive");
  if (zeta < 1.0) return std::nullopt;
  return 0.5 * std::acos(1.0 / zeta);
}

DirectorSample extractDirector(const QTensor& q, const std::optional<Vec3>& prev) {
  const EigenFrame f = eigenDecompose(q);
  DirectorSample s;
  s.n = f.vectors.column(2);
  s.flagged = f.values[2] - f.values[1] < 1e-8;
  if (prev && dot(s.n, *prev) < 0.0) s.n = -1.0 * s.n;
  return s;
}

double directorAngle(const Vec3& a, const Vec3& b) {
  return std::acos(std::min(1.0, std::abs(dot(a, b)) / (norm(a) * norm(b))));
}

Mat3 simpleShear(double rate) {
  Mat3 k;
  k(0, 1) = rate;
  return k;
}

double logLogSlope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceTable smallDeExperiment(const ModelParams& base, const std::vector<double>& de_list, const Mat3& kappa,
                                   const SmallDeOptions& opts, const SphereQuadrature& quad) {
  for (std::size_t i = 0; i < de_list.size(); ++i) {
    if (!(de_list[i] > 0.0 && de_list[i] < 0.5)) throw std::invalid_argument("every De must lie in (0, 0.5)");
    if (i > 0 && !(de_list[i] < de_list[i - 1])) throw std::invalid_argument("De list must be decreasing");
  }
  if (std::abs(kappa.trace()) > 1e-12) throw std::invalid_argument("velocity gradient must be traceless");
  const PhaseConstants pc = phaseConstants(base.alpha, base.L1, base.L2);
  const Vec3 n0 = normalized(opts.n0);

  ConvergenceTable table;
  std::vector<double> xs, ys;
  for (double de : de_list) {
    ConvergenceRow row;
    row.De = de;
    try {
      ModelParams p = base;
      p.De = de;
      const int steps = static_cast<int>(std::ceil(opts.t_final / (opts.dt_factor * de) - 1e-9));
      const double dt = opts.t_final / steps;
      HomState hs{QTensor::uniaxial(pc.s2, n0), kappa, 0.0};
      DirectorState ds{n0, 0.0};
      Vec3 prev = n0;
      double err = 0.0, biax = biaxiality(hs.Q);
      for (int k = 0; k < steps; ++k) {
        hs = stepHomogeneous(hs, dt, p, quad);
        ds = stepDirector(ds, dt, kappa, pc.zeta);
        const DirectorSample d = extractDirector(hs.Q, prev);
        if (!d.flagged) prev = d.n;
        err = std::max(err, directorAngle(prev, ds.n));
        biax = std::max(biax, biaxiality(hs.Q));
      }
      row.sup_angle_err = err;
      row.sup_biaxiality = biax;
      xs.push_back(de);
      ys.push_back(err);
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    row.fitted_slope_running = logLogSlope(xs, ys);
    table.rows.push_back(row);
  }
  table.slope = logLogSlope(xs, ys);
  return table;
}

}  // namespace qlc
