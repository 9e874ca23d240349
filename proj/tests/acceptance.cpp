// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments
// select criteria by number, e.g. "acceptance 1 3".

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mms.hpp"
#include "qlc/closure.hpp"
#include "qlc/dynamics.hpp"
#include "qlc/equilibrium.hpp"
#include "qlc/leslie.hpp"
#include "qlc/linear_ops.hpp"

using namespace qlc;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Checker {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (failures_.size() < 4) failures_.push_back(what);
    }
  }
  void note(const std::string& key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s=%.3g", key.c_str(), v);
    notes_.push_back(buf);
  }
  Outcome outcome() const {
    std::string d;
    for (const auto& n : notes_) d += (d.empty() ? "" : " ") + n;
    for (const auto& f : failures_) d += " [failed: " + f + "]";
    return {pass_, d};
  }

 private:
  bool pass_ = true;
  std::vector<std::string> notes_, failures_;
};

Mat3 randomMatrix(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat3 m;
  for (double& a : m.a) a = u(rng);
  return m;
}

Vec3 randomUnit(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  return normalized(Vec3{nd(rng), nd(rng), nd(rng)});
}

double seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> testedAlphas() { return {criticalAlpha().alpha + 0.5, 7.0, 8.0, 10.0, 15.0}; }

// Shared by criteria 1, 2 and 9.
struct ClosureSample {
  QTensor q;
  ClosurePoint point;
};

const std::vector<ClosureSample>& closureSamples(double* total_s = nullptr, double* median_ms = nullptr) {
  static std::vector<ClosureSample> samples;
  static double total = 0.0, median = 0.0;
  if (samples.empty()) {
    std::mt19937_64 rng(20240601);
    std::vector<double> times;
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 1000; ++i) {
      const QTensor q = samplePhysicalQ(rng, 0.05);
      const auto t1 = std::chrono::steady_clock::now();
      ClosurePoint p = solveClosure(q, 0.05, kDefaultClosureTol, defaultQuadrature());
      times.push_back(1e3 * seconds(t1));
      samples.push_back({q, std::move(p)});
    }
    total = seconds(t0);
    std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
    median = times[times.size() / 2];
  }
  if (total_s) *total_s = total;
  if (median_ms) *median_ms = median;
  return samples;
}

Outcome criterion1() {
  Checker c;
  double total = 0.0, median = 0.0;
  const auto& s = closureSamples(&total, &median);
  double worst = 0.0;
  for (const auto& x : s) worst = std::max(worst, (momentsOf(x.point.B(), defaultQuadrature()).q - x.q).norm());
  c.note("max_roundtrip", worst);
  c.note("median_ms", median);
  c.note("total_s", total);
  c.require(worst <= 1e-10, "round trip <= 1e-10");
  c.require(median < 1.0, "median < 1 ms");
  c.require(total < 30.0, "total < 30 s");
  return c.outcome();
}

Outcome criterion2() {
  Checker c;
  std::mt19937_64 rng(7);
  double id = 0.0, adj = 0.0, pos = 1e300;
  int n_pos = 0;
  for (const auto& x : closureSamples()) {
    const BinghamMoments m = momentsOf(x.point.B(), defaultQuadrature());
    const Mat3 r = applyMQ(m, x.point.B().matrix()) - 1.5 * x.q.matrix();
    id = std::max(id, r.frobenius());
    for (int k = 0; k < 10; ++k) {
      const Mat3 a = randomMatrix(rng), b = randomMatrix(rng);
      adj = std::max(adj, std::abs(ddot(applyMQ(m, a), b) - ddot(applyMQ(m, b), a)));
      pos = std::min(pos, ddot(applyMQ(m, a), a));
      ++n_pos;
    }
  }
  c.note("max_identity", id);
  c.note("max_adjoint_defect", adj);
  c.note("min_quadratic_form", pos);
  c.note("forms_checked", n_pos);
  c.require(id <= 1e-8, "M_Q(B_Q) = 1.5 Q");
  c.require(adj <= 1e-12, "self-adjoint");
  c.require(pos >= -1e-12, "non-negative");
  c.require(n_pos >= 10000, "10^4 forms");
  return c.outcome();
}

Outcome criterion3() {
  Checker c;
  double res = 0.0, ratio = 0.0, xi = 0.0, parodi = 0.0, g2 = 0.0, ineq = 1e300;
  for (double alpha : testedAlphas()) {
    const PhaseConstants p = phaseConstants(alpha, 1.0, 0.5);
    res = std::max(res, std::abs(criticalResidual(p.eta, alpha)));
    ratio = std::max(ratio, std::abs(alpha - p.a0 / (p.a2 - p.a4)) / alpha);
    ineq = std::min({ineq, 3 * p.a2 * p.a2 + 2 * p.a0 * p.a2 - 5 * p.a0 * p.a4, 6 * p.a2 - 5 * p.a4 - p.a0});
    xi = std::max(xi, std::abs(p.xi2 + p.xi3 - 1.0 / alpha));
    parodi = std::max(parodi, std::abs(p.alpha2 + p.alpha3 - (p.alpha6 - p.alpha5)));
    g2 = std::max(g2, std::abs(p.gamma2 + p.s2));
  }
  c.note("max_residual", res);
  c.note("max_alpha_ratio", ratio);
  c.note("min_inequality", ineq);
  c.note("max_xi_defect", xi);
  c.note("max_parodi", parodi);
  c.note("gamma2_plus_s2", g2);
  c.require(res <= 1e-10, "critical residual");
  c.require(ratio <= 1e-8, "alpha = A0/(A2-A4)");
  c.require(ineq > 0.0, "strict inequalities");
  c.require(xi <= 1e-10, "xi2 + xi3 = 1/alpha");
  c.require(parodi <= 1e-12, "Parodi");
  c.require(g2 == 0.0, "gamma2 = -S2");
  return c.outcome();
}

Outcome criterion4() {
  Checker c;
  std::mt19937_64 rng(11);
  double inv = 0.0, kern = 0.0, comm = 0.0, cov = 0.0, rmin = 1e300;
  for (double alpha : testedAlphas()) {
    const Vec3 n = randomUnit(rng);
    const DirectorContext ctx = makeDirectorContext(n, phaseConstants(alpha, 1.0, 0.5));
    for (int t = 0; t < 100; ++t) {
      const QTensor q = QTensor::fromMatrix(randomMatrix(rng));
      inv = std::max(inv, (applyQnInverse(ctx, applyQn(ctx, q)) - q).norm());
      const QTensor jq = applyJ(ctx.moments, q.matrix());
      comm = std::max(comm, (applyJ(ctx.moments, projectIn(n, q).matrix()) - projectIn(n, jq)).norm());
      comm = std::max(comm, (applyJ(ctx.moments, projectOut(n, q).matrix()) - projectOut(n, jq)).norm());
    }
    for (const QTensor& e : inBasis(n)) kern = std::max(kern, applyHn(ctx, e).norm());
    rmin = std::min(rmin, coercivityConstant(ctx));

    // covariance of mm : B under the equilibrium density
    const SphereQuadrature& quad = defaultQuadrature();
    const QTensor b0 = QTensor::uniaxial(ctx.constants.eta, n);
    const double lz = logPartition(b0, quad);
    for (int t = 0; t < 5; ++t) {
      const QTensor b1 = QTensor::fromMatrix(randomMatrix(rng)), b2 = QTensor::fromMatrix(randomMatrix(rng));
      double s12 = 0.0, s1 = 0.0, s2 = 0.0;
      for (std::size_t k = 0; k < quad.size(); ++k) {
        const Mat3 mm = Mat3::outer(quad.nodes[k], quad.nodes[k]);
        const double w = quad.weights[k] * std::exp(ddot(mm, b0.matrix()) - lz);
        const double x1 = ddot(mm, b1.matrix()), x2 = ddot(mm, b2.matrix());
        s12 += w * x1 * x2;
        s1 += w * x1;
        s2 += w * x2;
      }
      cov = std::max(cov, std::abs(applyQn(ctx, b1).dot(b2) - (s12 - s1 * s2)));
    }
  }
  c.note("max_inverse_defect", inv);
  c.note("max_in_space_image", kern);
  c.note("min_out_rayleigh", rmin);
  c.note("max_commutator", comm);
  c.note("max_covariance_defect", cov);
  c.require(inv <= 1e-10, "inverse");
  c.require(kern <= 1e-10, "kernel");
  c.require(rmin > 0.0, "coercive");
  c.require(comm <= 1e-10, "commutators");
  c.require(cov <= 1e-10, "covariance");
  return c.outcome();
}

Outcome criterion5() {
  Checker c;
  Grid2D g(64);
  std::mt19937_64 rng(5);
  const double L1 = 1.0, L2 = 0.5;
  const PhaseConstants p = phaseConstants(8.0, L1, L2);
  double worst = 0.0;
  for (int t = 0; t < 5; ++t) {
    const VecField n = randomSmoothDirector(g, rng, 2, 1.0);
    QField q = zeroQField(g);
    for (std::size_t k = 0; k < g.realSize(); ++k) setQ(q, k, QTensor::uniaxial(p.s2, Vec3{n[0][k], n[1][k], n[2][k]}));
    const double fe = elasticEnergy(q, g, L1, L2);
    const double of = oseenFrankEnergy(n, FrankConstants{p.k1, p.k2, p.k3, p.k4}, g);
    worst = std::max(worst, std::abs(fe - of) / std::abs(of));
  }
  c.note("max_relative_diff", worst);
  c.require(worst <= 1e-8, "relative difference <= 1e-8");
  return c.outcome();
}

Outcome criterion6() {
  Checker c;
  Grid2D g(128);
  ModelParams p;
  p.alpha = 8.0;
  p.De = 1.0;
  p.Re = 1.0;
  p.gamma = 0.5;
  const double s2 = orderParameters(solveEta(p.alpha, Branch::Stable)).s2;
  const FieldState init = randomSmoothState(g, s2, 0.5, 2024);
  double m0 = 1.0;
  for (std::size_t k = 0; k < g.realSize(); ++k) m0 = std::min(m0, physicalMargin(qAt(init.q, k)));
  FieldSolver solver(g, p);
  solver.setState(init);
  const double dt = 0.005;
  const int steps = 2000;
  std::vector<EnergyReport> r;
  r.reserve(steps + 1);
  for (int k = 0; k < steps; ++k) r.push_back(solver.step(dt));
  r.push_back(solver.energy());
  const double e0 = r.front().total;
  int increases = 0;
  double integrated = 0.0, min_margin = 1.0;
  for (int k = 0; k < steps; ++k) {
    if (r[k + 1].total > r[k].total + 1e-10 * std::abs(e0)) ++increases;
    integrated += 0.5 * dt * (r[k].dissipation() + r[k + 1].dissipation());
  }
  for (const auto& e : r) min_margin = std::min(min_margin, e.min_margin);
  const double drop = e0 - r.back().total;
  const double mismatch = std::abs(drop - integrated) / integrated;
  c.note("initial_margin", m0);
  c.note("energy_increases", increases);
  c.note("energy_drop", drop);
  c.note("dissipation_mismatch", mismatch);
  c.note("min_margin", min_margin);
  c.note("halvings", solver.halvings());
  c.require(m0 >= 0.1, "initial data in the 0.1 margin");
  c.require(increases == 0, "energy non-increasing");
  c.require(mismatch <= 0.01, "dissipation within 1%");
  c.require(min_margin >= 0.5 * p.delta, "margin delta/2 kept");
  return c.outcome();
}

Outcome criterion7() {
  Checker c;
  ModelParams p;
  p.alpha = 7.0;
  const PhaseConstants pc = phaseConstants(p.alpha, p.L1, p.L2);
  const std::vector<double> de{0.2, 0.1, 0.05, 0.025};
  const ConvergenceTable t = smallDeExperiment(p, de, simpleShear(1.0), SmallDeOptions{}, defaultQuadrature());
  bool rows_ok = true;
  for (const auto& row : t.rows) rows_ok = rows_ok && row.ok;
  c.note("zeta", pc.zeta);
  c.note("slope", t.slope);
  for (const auto& row : t.rows) c.note("err@" + std::to_string(row.De).substr(0, 5), row.sup_angle_err);
  c.require(pc.zeta > 1.0, "flow-aligning");
  c.require(rows_ok, "all rows ran");
  c.require(t.slope >= 0.7 && t.slope <= 1.3, "slope in [0.7, 1.3]");
  if (rows_ok) {
    const auto& a = t.rows[2];
    const auto& b = t.rows[3];
    c.note("biax_prev", a.sup_biaxiality);
    c.note("biax_last", b.sup_biaxiality);
    c.require(b.sup_biaxiality <= 2.0 * (b.De / a.De) * a.sup_biaxiality, "biaxiality linear in De");
  }
  return c.outcome();
}

Outcome criterion8() {
  Checker c;
  ModelParams p;
  FieldOptions opts;
  const double t_final = 0.4;
  // temporal: forcing exact on the same grid
  std::vector<double> errs;
  for (double dt : {0.02, 0.01, 0.005, 0.0025}) {
    std::unique_ptr<Grid2D> g;
    const FieldState s = mms::run(16, 16, dt, t_final, p, opts, g);
    errs.push_back(mms::maxDiff(s, mms::exact(*g, t_final)));
  }
  double min_slope = 1e300;
  for (std::size_t i = 1; i < errs.size(); ++i) {
    const double sl = std::log2(errs[i - 1] / errs[i]);
    min_slope = std::min(min_slope, sl);
  }
  c.note("dt_err_last", errs.back());
  c.note("min_time_slope", min_slope);
  c.require(min_slope >= 1.8, "temporal order >= 1.8");

  // spatial: same dt, compared with a 64^2 run
  const double dt = 0.01, floor = 1e-9;
  std::unique_ptr<Grid2D> gr;
  const FieldState ref = mms::run(64, 64, dt, t_final, p, opts, gr);
  std::vector<double> se;
  for (int n : {8, 16, 24, 32}) {
    std::unique_ptr<Grid2D> g;
    const FieldState s = mms::run(n, 64, dt, t_final, p, opts, g);
    FieldState r;
    for (int k = 0; k < 5; ++k) r.q[k] = resample(ref.q[k], *gr, *g);
    for (int k = 0; k < 3; ++k) r.v[k] = resample(ref.v[k], *gr, *g);
    se.push_back(mms::maxDiff(s, r));
  }
  bool spectral = true;
  for (std::size_t i = 1; i < se.size(); ++i)
    if (se[i - 1] > floor && !(se[i] <= 0.1 * se[i - 1] || se[i] <= floor)) spectral = false;
  c.note("err_N8", se[0]);
  c.note("err_N16", se[1]);
  c.note("err_N24", se[2]);
  c.note("err_N32", se[3]);
  c.require(spectral, "spectral decay to the floor");
  c.require(se.back() <= floor, "floor reached");
  return c.outcome();
}

Outcome criterion9() {
  Checker c;
  const double bound = spreadBound(0.1);
  double worst = 0.0;
  int n = 0;
  auto spread = [](const ClosurePoint& p) { return p.b[2] - p.b[0]; };
  for (const auto& x : closureSamples()) {
    if (physicalMargin(x.q) < 0.1) continue;
    worst = std::max(worst, spread(x.point));
    ++n;
  }
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    const ClosurePoint p = solveClosure(samplePhysicalQ(rng, 0.1), 0.1, kDefaultClosureTol, defaultQuadrature());
    worst = std::max(worst, spread(p));
    ++n;
  }
  c.note("solves", n);
  c.note("max_spread", worst);
  c.note("bound", bound);
  c.require(worst <= bound, "spread <= bound");
  return c.outcome();
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closure round-trip", criterion1},      {"closure operator identities", criterion2},
      {"equilibrium identities", criterion3},  {"linearized operators", criterion4},
      {"Oseen-Frank consistency", criterion5}, {"energy dissipation", criterion6},
      {"small-Deborah convergence", criterion7}, {"manufactured solutions", criterion8},
      {"closure spread bound", criterion9}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d (%s): %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str(), seconds(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
