#include "qlc/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace qlc {

std::vector<std::string> ModelParams::violations() const {
  std::vector<std::string> v;
  auto finite = [&](double x, const char* name) {
    if (!std::isfinite(x)) v.push_back(std::string(name) + " must be finite");
    return std::isfinite(x);
  };
  if (finite(alpha, "alpha") && !(alpha > 0.0)) v.push_back("alpha must be positive");
  if (finite(epsilon, "epsilon") && !(epsilon > 0.0)) v.push_back("epsilon must be positive");
  if (finite(De, "De") && !(De > 0.0)) v.push_back("De must be positive");
  if (finite(Re, "Re") && !(Re > 0.0)) v.push_back("Re must be positive");
  if (finite(gamma, "gamma") && !(gamma > 0.0 && gamma < 1.0)) v.push_back("gamma must lie in (0,1)");
  if (finite(L1, "L1") && !(L1 > 0.0)) v.push_back("L1 must be positive");
  if (finite(L2, "L2") && !(L1 + 2.0 * L2 > 0.0)) v.push_back("L1 + 2 L2 must be positive");
  if (finite(delta, "delta") && !(delta > 0.0 && delta < 1.0 / 3.0)) v.push_back("delta must lie in (0,1/3)");
  return v;
}

void ModelParams::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::string msg;
  for (const auto& s : v) msg += (msg.empty() ? "" : "; ") + s;
  throw std::invalid_argument(msg);
}

QTensor applyJ(const ClosurePoint& point, const Mat3& a) { return QTensor::fromMatrix(applyMQ(point, a)); }

QTensor homogeneousRhs(const HomState& s, const ModelParams& p, const SphereQuadrature& quad) {
  const ClosurePoint cp = solveClosure(s.Q, 0.0, kDefaultClosureTol, quad);
  const Mat3 mu = cp.B().matrix() - p.alpha * s.Q.matrix();
  QTensor r = (-4.0 / p.De) * applyJ(cp, mu);
  r += 2.0 * applyJ(cp, s.kappa.transpose());
  return r;
}

namespace {

HomState rk4(const HomState& s, double dt, const ModelParams& p, const SphereQuadrature& quad) {
  auto at = [&](const QTensor& q) { return HomState{q, s.kappa, s.t}; };
  const QTensor k1 = homogeneousRhs(s, p, quad);
  const QTensor k2 = homogeneousRhs(at(s.Q + (0.5 * dt) * k1), p, quad);
  const QTensor k3 = homogeneousRhs(at(s.Q + (0.5 * dt) * k2), p, quad);
  const QTensor k4 = homogeneousRhs(at(s.Q + dt * k3), p, quad);
  HomState out = s;
  out.Q = s.Q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  out.t = s.t + dt;
  return out;
}

HomState stepHalving(const HomState& s, double dt, const ModelParams& p, const SphereQuadrature& quad, int depth) {
  try {
    HomState out = rk4(s, dt, p, quad);
    if (isPhysical(out.Q, 0.5 * p.delta)) return out;
  } catch (const std::domain_error&) {
  }
  if (depth >= 10) {
    std::ostringstream os;
    os << "physicality margin " << 0.5 * p.delta << " lost at t = " << s.t << " after 10 step halvings";
    throw PhysicalityError(os.str());
  }
  const HomState mid = stepHalving(s, 0.5 * dt, p, quad, depth + 1);
  return stepHalving(mid, 0.5 * dt, p, quad, depth + 1);
}

}  // namespace

HomState stepHomogeneous(const HomState& s, double dt, const ModelParams& p, const SphereQuadrature& quad) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  return stepHalving(s, dt, p, quad, 0);
}

QField muQ(const QField& q, const ModelParams& p, const SphereQuadrature& quad, const Grid2D& g) {
  const QField ell = ellOperator(q, g, p.L1, p.L2);
  QField mu = zeroQField(g);
  for (std::size_t i = 0; i < g.realSize(); ++i) {
    const QTensor qi = qAt(q, i);
    if (!isPhysical(qi, 0.5 * p.delta)) {
      std::ostringstream os;
      os << "Q at grid point (" << i % g.n() << ", " << i / g.n() << ") violates the margin " << 0.5 * p.delta;
      throw PhysicalityError(os.str());
    }
    const ClosurePoint cp = solveClosure(qi, 0.0, kDefaultClosureTol, quad);
    QTensor m = cp.B() - p.alpha * qi;
    m += p.epsilon * qAt(ell, i);
    setQ(mu, i, m);
  }
  return mu;
}

// ---------------------------------------------------------------------------

FieldSolver::FieldSolver(const Grid2D& grid, const ModelParams& params, FieldOptions options)
    : grid_(grid),
      params_(params),
      options_(std::move(options)),
      quad_(buildQuadrature(options_.quad_polar, options_.quad_azimuthal)) {
  params_.validate();
  state_.q = zeroQField(grid_);
  state_.v = zeroVecField(grid_);
}

void FieldSolver::project(std::array<SpecField, 3>& v) const {
  for (std::size_t m = 0; m < grid_.specSize(); ++m) {
    const double kx = grid_.kx(m), ky = grid_.ky(m);
    const double k2 = kx * kx + ky * ky;
    if (k2 == 0.0) continue;
    const std::complex<double> kv = (kx * v[0][m] + ky * v[1][m]) / k2;
    v[0][m] -= kx * kv;
    v[1][m] -= ky * kv;
  }
}

void FieldSolver::setState(const FieldState& s) {
  state_ = s;
  SpecField f;
  for (int c = 0; c < 5; ++c) {
    grid_.forward(state_.q[c], f);
    grid_.truncate(f);
    grid_.inverse(f, state_.q[c]);
  }
  std::array<SpecField, 3> v;
  for (int c = 0; c < 3; ++c) {
    grid_.forward(state_.v[c], v[c]);
    grid_.truncate(v[c]);
  }
  project(v);
  for (int c = 0; c < 3; ++c) grid_.inverse(v[c], state_.v[c]);

  double lmax = -1.0;
  for (std::size_t p = 0; p < grid_.realSize(); ++p)
    lmax = std::max(lmax, eigenDecompose(qAt(state_.q, p)).values[2]);
  cbar_ = std::min(1.0, 1.0 / 3.0 + lmax + 0.1);
  b_now_.clear();
  b_prev_.clear();
  have_b_prev_ = false;
  prev_state_.reset();
  prev_eval_.reset();
}

double FieldSolver::implicitQ(std::size_t m) const {
  const double kx = grid_.kx(m), ky = grid_.ky(m);
  const double k2 = kx * kx + ky * ky;
  return -(4.0 * params_.epsilon * cbar_ / params_.De) * (params_.L1 + 4.0 / 3.0 * std::max(params_.L2, 0.0)) * k2;
}

double FieldSolver::implicitV(std::size_t m) const {
  const double kx = grid_.kx(m), ky = grid_.ky(m);
  const double k2 = kx * kx + ky * ky;
  return -(params_.gamma / params_.Re + (1.0 - params_.gamma) / (2.0 * params_.Re)) * k2;
}

FieldSolver::Eval FieldSolver::evaluate(const FieldState& s, bool with_forcing) {
  const Grid2D& g = grid_;
  const ModelParams& P = params_;
  const std::size_t np = g.realSize();

  std::array<SpecField, 5> qh;
  std::array<SpecField, 3> vh;
  for (int c = 0; c < 5; ++c) g.forward(s.q[c], qh[c]);
  for (int c = 0; c < 3; ++c) g.forward(s.v[c], vh[c]);

  QGradient gq;
  std::array<std::array<RealField, 2>, 3> gv;
  SpecField tmp;
  for (int c = 0; c < 5; ++c)
    for (int d = 0; d < 2; ++d) {
      g.derivative(qh[c], tmp, d);
      g.inverse(tmp, gq[c][d]);
    }
  for (int c = 0; c < 3; ++c)
    for (int d = 0; d < 2; ++d) {
      g.derivative(vh[c], tmp, d);
      g.inverse(tmp, gv[c][d]);
    }
  const QField ell = ellOperator(s.q, g, P.L1, P.L2);

  QField fq = zeroQField(g);
  std::array<RealField, 6> tau;  // tau(j, i) for j in {x, y}
  for (auto& t : tau) t = g.zeroReal();
  VecField adv = zeroVecField(g);

  const bool warm = b_now_.size() == np;
  std::vector<QTensor> b_new(np);
  const double c_closure = (1.0 - P.gamma) / (2.0 * P.Re);
  const double c_coupling = (1.0 - P.gamma) / (P.De * P.Re);
  double kin = 0, bulk = 0, elas = 0, dvisc = 0, dclos = 0, drot = 0;
  double min_margin = std::numeric_limits<double>::infinity();

  for (std::size_t p = 0; p < np; ++p) {
    const QTensor q = qAt(s.q, p);
    std::optional<QTensor> hint;
    if (warm) hint = have_b_prev_ ? 2.0 * b_now_[p] - b_prev_[p] : b_now_[p];
    ClosurePoint cp;
    try {
      cp = solveClosure(q, 0.0, options_.closure_tol, quad_, hint);
    } catch (const ClosureError&) {
      cp = solveClosure(q, 0.0, options_.closure_tol, quad_);
    }
    const QTensor b = cp.B();
    b_new[p] = b;
    const Vec3& lam = cp.frame.values;
    min_margin = std::min({min_margin, lam[0] + 1.0 / 3.0, 2.0 / 3.0 - lam[2]});

    const Mat3 qm = q.matrix();
    Mat3 mu = b.matrix() - P.alpha * qm;
    mu += P.epsilon * qAt(ell, p).matrix();

    Mat3 kappa;
    for (int i = 0; i < 3; ++i)
      for (int d = 0; d < 2; ++d) kappa(i, d) = gv[i][d][p];
    const Mat3 dsym = kappa.sym();

    const double vx = s.v[0][p], vy = s.v[1][p];
    const Mat3 mq_mu = applyMQ(cp, mu);
    const QTensor j_mu = QTensor::fromMatrix(mq_mu);
    const QTensor j_kt = applyJ(cp, kappa.transpose());
    for (int c = 0; c < 5; ++c)
      fq[c][p] = -(vx * gq[c][0][p] + vy * gq[c][1][p]) - (4.0 / P.De) * j_mu[c] + 2.0 * j_kt[c];

    const PointGradient pg = pointGradient(gq, p);
    const Mat3 sd = distortionStressAt(pg, pg, P.L1, P.L2);
    const Mat3 dm4 = contractM4(cp, dsym);
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 3; ++i)
        tau[3 * j + i][p] = c_closure * dm4(j, i) + c_coupling * (2.0 * mq_mu(j, i) + P.epsilon * sd(j, i));
    for (int i = 0; i < 3; ++i) adv[i][p] = vx * gv[i][0][p] + vy * gv[i][1][p];

    kin += 0.5 * (vx * vx + vy * vy + s.v[2][p] * s.v[2][p]);
    bulk += -cp.logZ() + q.dot(b) - 0.5 * P.alpha * q.dot(q);
    elas += P.epsilon * elasticDensityAt(pg, P.L1, P.L2);
    dvisc += P.gamma / P.Re * ddot(kappa, kappa);
    dclos += c_closure * ddot(dsym, dm4);
    drot += 4.0 * (1.0 - P.gamma) / (P.Re * P.De * P.De) * ddot(mu, mq_mu);
  }

  b_prev_ = std::move(b_now_);
  have_b_prev_ = warm;
  b_now_ = std::move(b_new);

  Eval e;
  const double area = g.cellArea();
  e.energy.kinetic = kin * area;
  e.energy.bulk = bulk * area;
  e.energy.elastic = elas * area;
  e.energy.total = e.energy.kinetic + (1.0 - P.gamma) / (P.Re * P.De) * (e.energy.bulk + e.energy.elastic);
  e.energy.diss_viscous = dvisc * area;
  e.energy.diss_closure = dclos * area;
  e.energy.diss_rotational = drot * area;
  e.energy.min_margin = min_margin;

  QField force_q;
  VecField force_v;
  if (with_forcing && options_.forcing) {
    force_q = zeroQField(g);
    force_v = zeroVecField(g);
    options_.forcing(s.t, force_q, force_v);
    for (int c = 0; c < 5; ++c)
      for (std::size_t p = 0; p < np; ++p) fq[c][p] += force_q[c][p];
    for (int c = 0; c < 3; ++c)
      for (std::size_t p = 0; p < np; ++p) adv[c][p] -= force_v[c][p];
  }

  for (int c = 0; c < 5; ++c) {
    g.forward(fq[c], e.fq[c]);
    for (std::size_t m = 0; m < g.specSize(); ++m) e.fq[c][m] -= implicitQ(m) * qh[c][m];
    g.truncate(e.fq[c]);
  }
  std::array<SpecField, 6> tauh;
  for (int k = 0; k < 6; ++k) g.forward(tau[k], tauh[k]);
  const double visc = P.gamma / P.Re;
  for (int i = 0; i < 3; ++i) {
    g.forward(adv[i], e.fv[i]);
    for (std::size_t m = 0; m < g.specSize(); ++m) {
      const double kx = g.kx(m), ky = g.ky(m);
      const std::complex<double> I(0.0, 1.0);
      std::complex<double> div = 0.0;
      if (!g.nyquist(m)) div = I * (kx * tauh[i][m] + ky * tauh[3 + i][m]);
      const std::complex<double> full = -e.fv[i][m] + div - visc * (kx * kx + ky * ky) * vh[i][m];
      e.fv[i][m] = full - implicitV(m) * vh[i][m];
    }
  }
  project(e.fv);
  for (int i = 0; i < 3; ++i) g.truncate(e.fv[i]);
  return e;
}

void FieldSolver::rhs(const FieldState& s, QField& fq, VecField& fv) {
  // Restore the warm-start history afterwards so diagnostics do not perturb runs.
  const auto bn = b_now_, bp = b_prev_;
  const bool hp = have_b_prev_;
  Eval e = evaluate(s, true);
  b_now_ = bn;
  b_prev_ = bp;
  have_b_prev_ = hp;
  std::array<SpecField, 5> qh;
  std::array<SpecField, 3> vh;
  for (int c = 0; c < 5; ++c) grid_.forward(s.q[c], qh[c]);
  for (int c = 0; c < 3; ++c) grid_.forward(s.v[c], vh[c]);
  for (int c = 0; c < 5; ++c) {
    for (std::size_t m = 0; m < grid_.specSize(); ++m) e.fq[c][m] += implicitQ(m) * qh[c][m];
    grid_.inverse(e.fq[c], fq[c]);
  }
  for (int c = 0; c < 3; ++c) {
    for (std::size_t m = 0; m < grid_.specSize(); ++m) e.fv[c][m] += implicitV(m) * vh[c][m];
    grid_.inverse(e.fv[c], fv[c]);
  }
}

void FieldSolver::advance(double dt) {
  Eval e = evaluate(state_, true);
  last_energy_ = e.energy;
  const Grid2D& g = grid_;
  std::array<SpecField, 5> qh, qh_prev;
  std::array<SpecField, 3> vh, vh_prev;
  for (int c = 0; c < 5; ++c) g.forward(state_.q[c], qh[c]);
  for (int c = 0; c < 3; ++c) g.forward(state_.v[c], vh[c]);
  const bool bdf2 = prev_state_ && prev_eval_ && std::abs(prev_dt_ - dt) <= 1e-14 * dt;
  if (bdf2) {
    for (int c = 0; c < 5; ++c) g.forward(prev_state_->q[c], qh_prev[c]);
    for (int c = 0; c < 3; ++c) g.forward(prev_state_->v[c], vh_prev[c]);
  }
  FieldState next;
  next.t = state_.t + dt;
  for (int c = 0; c < 5; ++c) {
    SpecField out(g.specSize());
    for (std::size_t m = 0; m < g.specSize(); ++m) {
      const double a = implicitQ(m);
      if (bdf2)
        out[m] = (4.0 * qh[c][m] - qh_prev[c][m] + 2.0 * dt * (2.0 * e.fq[c][m] - prev_eval_->fq[c][m])) /
                 (3.0 - 2.0 * dt * a);
      else
        out[m] = (qh[c][m] + dt * e.fq[c][m]) / (1.0 - dt * a);
    }
    g.truncate(out);
    g.inverse(out, next.q[c]);
  }
  std::array<SpecField, 3> vout;
  for (int c = 0; c < 3; ++c) {
    vout[c].resize(g.specSize());
    for (std::size_t m = 0; m < g.specSize(); ++m) {
      const double a = implicitV(m);
      if (bdf2)
        vout[c][m] = (4.0 * vh[c][m] - vh_prev[c][m] + 2.0 * dt * (2.0 * e.fv[c][m] - prev_eval_->fv[c][m])) /
                     (3.0 - 2.0 * dt * a);
      else
        vout[c][m] = (vh[c][m] + dt * e.fv[c][m]) / (1.0 - dt * a);
    }
  }
  project(vout);
  for (int c = 0; c < 3; ++c) {
    g.truncate(vout[c]);
    g.inverse(vout[c], next.v[c]);
  }
  prev_state_ = state_;
  prev_eval_ = std::move(e);
  prev_dt_ = dt;
  state_ = std::move(next);
}

EnergyReport FieldSolver::step(double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const FieldState saved = state_;
  const auto saved_prev = prev_state_;
  const auto saved_eval = prev_eval_;
  const double saved_dt = prev_dt_;
  const auto saved_bn = b_now_, saved_bp = b_prev_;
  const bool saved_hp = have_b_prev_;

  advance(dt);
  if (divergenceResidual() > 1e-10) throw std::logic_error("velocity left the divergence-free subspace");
  const EnergyReport report = last_energy_;
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < grid_.realSize(); ++p) margin = std::min(margin, physicalMargin(qAt(state_.q, p)));
  if (margin >= 0.5 * params_.delta) return report;

  // Retry the interval with successively halved steps from a fresh start.
  for (int k = 1; k <= 10; ++k) {
    state_ = saved;
    prev_state_.reset();
    prev_eval_.reset();
    b_now_ = saved_bn;
    b_prev_ = saved_bp;
    have_b_prev_ = saved_hp;
    const int sub = 1 << k;
    bool ok = true;
    for (int i = 0; i < sub && ok; ++i) {
      advance(dt / sub);
      for (std::size_t p = 0; p < grid_.realSize(); ++p)
        if (physicalMargin(qAt(state_.q, p)) < 0.5 * params_.delta) {
          ok = false;
          break;
        }
    }
    if (ok) {
      halvings_total_ += k;
      prev_state_.reset();
      prev_eval_.reset();
      return report;
    }
  }
  state_ = saved;
  prev_state_ = saved_prev;
  prev_eval_ = saved_eval;
  prev_dt_ = saved_dt;
  std::ostringstream os;
  os << "physicality margin " << 0.5 * params_.delta << " lost at t = " << saved.t << " after 10 step halvings";
  throw PhysicalityError(os.str());
}

EnergyReport FieldSolver::energy() {
  const auto bn = b_now_, bp = b_prev_;
  const bool hp = have_b_prev_;
  const EnergyReport r = evaluate(state_, false).energy;
  b_now_ = bn;
  b_prev_ = bp;
  have_b_prev_ = hp;
  return r;
}

double FieldSolver::divergenceResidual() const {
  SpecField vx, vy;
  grid_.forward(state_.v[0], vx);
  grid_.forward(state_.v[1], vy);
  double num = 0.0, den = 0.0;
  for (std::size_t m = 0; m < grid_.specSize(); ++m) {
    const double kx = grid_.kx(m), ky = grid_.ky(m);
    num = std::max(num, std::abs(kx * vx[m] + ky * vy[m]));
    den = std::max({den, std::abs(vx[m]), std::abs(vy[m])});
  }
  // Fourier amplitudes; relative for O(1) flows, absolute for negligible ones
  const double scale = static_cast<double>(grid_.realSize());
  return (num / scale) / std::max(1.0, den / scale);
}

double defaultTimeStep(const FieldState& s, const Grid2D& g, const ModelParams& p) {
  double vmax = 0.0;
  for (std::size_t i = 0; i < g.realSize(); ++i)
    vmax = std::max(vmax, std::sqrt(s.v[0][i] * s.v[0][i] + s.v[1][i] * s.v[1][i] + s.v[2][i] * s.v[2][i]));
  const double adv = vmax > 0.0 ? 0.25 * g.spacing() / vmax : std::numeric_limits<double>::infinity();
  return std::min(adv, 0.1 * p.De);
}

RealField randomSmoothField(const Grid2D& g, std::mt19937_64& rng, int kmax, double amplitude) {
  std::normal_distribution<double> nd;
  RealField f = g.zeroReal();
  for (int kx = 0; kx <= kmax; ++kx)
    for (int ky = -kmax; ky <= kmax; ++ky) {
      if (kx == 0 && ky <= 0) continue;
      const double a = nd(rng), b = nd(rng);
      for (std::size_t p = 0; p < g.realSize(); ++p) {
        const double ph = kx * g.x(p) + ky * g.y(p);
        f[p] += a * std::cos(ph) + b * std::sin(ph);
      }
    }
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  if (m > 0.0)
    for (double& v : f) v *= amplitude / m;
  return f;
}

VecField randomSmoothDirector(const Grid2D& g, std::mt19937_64& rng, int kmax, double angle_amplitude) {
  const RealField th = randomSmoothField(g, rng, kmax, angle_amplitude);
  const RealField ph = randomSmoothField(g, rng, kmax, 0.5 * angle_amplitude);
  VecField n = zeroVecField(g);
  for (std::size_t p = 0; p < g.realSize(); ++p) {
    n[0][p] = std::cos(ph[p]) * std::cos(th[p]);
    n[1][p] = std::cos(ph[p]) * std::sin(th[p]);
    n[2][p] = std::sin(ph[p]);
  }
  return n;
}

FieldState randomSmoothState(const Grid2D& g, double s, double v_amp, std::uint64_t seed, int kmax) {
  std::mt19937_64 rng(seed);
  FieldState st;
  st.q = zeroQField(g);
  const VecField n = randomSmoothDirector(g, rng, kmax, 1.0);
  for (std::size_t p = 0; p < g.realSize(); ++p)
    setQ(st.q, p, QTensor::uniaxial(s, Vec3{n[0][p], n[1][p], n[2][p]}));
  const RealField psi = randomSmoothField(g, rng, kmax, 1.0);
  st.v = zeroVecField(g);
  st.v[0] = g.derivative(psi, 1);
  st.v[1] = g.derivative(psi, 0);
  for (double& v : st.v[1]) v = -v;
  st.v[2] = randomSmoothField(g, rng, kmax, v_amp);
  double m = 0.0;
  for (std::size_t p = 0; p < g.realSize(); ++p) m = std::max(m, std::hypot(st.v[0][p], st.v[1][p]));
  if (m > 0.0)
    for (int c = 0; c < 2; ++c)
      for (double& v : st.v[c]) v *= v_amp / m;
  return st;
}

// ---------------------------------------------------------------------------

namespace {

template <class T>
void putLE(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T getLE(std::istream& is) {
  unsigned char b[sizeof(T)];
  is.read(reinterpret_cast<char*>(b), sizeof(T));
  if (!is) throw std::runtime_error("snapshot truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void writeSnapshot(const std::string& path, const FieldState& s, const Grid2D& g) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os.write("QLCFIELD", 8);
  putLE<std::uint32_t>(os, 1);
  putLE<std::uint32_t>(os, static_cast<std::uint32_t>(g.n()));
  putLE<std::uint32_t>(os, static_cast<std::uint32_t>(g.n()));
  putLE<std::uint32_t>(os, 8);
  putLE<double>(os, s.t);
  putLE<double>(os, g.length());
  putLE<double>(os, g.length());
  for (int c = 0; c < 5; ++c)
    for (double v : s.q[c]) putLE<double>(os, v);
  for (int c = 0; c < 3; ++c)
    for (double v : s.v[c]) putLE<double>(os, v);
  if (!os) throw std::runtime_error("failed writing " + path);
}

FieldState readSnapshot(const std::string& path, int& n) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "QLCFIELD", 8) != 0) throw std::runtime_error("not a field snapshot: " + path);
  const auto version = getLE<std::uint32_t>(is);
  if (version != 1) throw std::runtime_error("unsupported snapshot version");
  const auto nx = getLE<std::uint32_t>(is);
  const auto ny = getLE<std::uint32_t>(is);
  const auto nc = getLE<std::uint32_t>(is);
  if (nx != ny || nc != 8) throw std::runtime_error("unsupported snapshot layout");
  n = static_cast<int>(nx);
  FieldState s;
  s.t = getLE<double>(is);
  getLE<double>(is);
  getLE<double>(is);
  const std::size_t np = static_cast<std::size_t>(nx) * ny;
  for (int c = 0; c < 5; ++c) {
    s.q[c].resize(np);
    for (auto& v : s.q[c]) v = getLE<double>(is);
  }
  for (int c = 0; c < 3; ++c) {
    s.v[c].resize(np);
    for (auto& v : s.v[c]) v = getLE<double>(is);
  }
  return s;
}

}  // namespace qlc
