#include "qlc/harness.hpp"

#include <fcntl.h>
#include <fftw3.h>
#include <openssl/evp.h>
#include <openssl/opensslv.h>
#include <openssl/crypto.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "qlc/closure.hpp"
#include "qlc/equilibrium.hpp"
#include "qlc/linear_ops.hpp"

namespace qlc {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";

struct KindEntry {
  ExperimentKind kind;
  const char* name;
};
constexpr KindEntry kKinds[] = {
    {ExperimentKind::PhaseTable, "phase-table"},   {ExperimentKind::ClosureValidate, "closure-validate"},
    {ExperimentKind::HomogeneousRun, "homogeneous-run"}, {ExperimentKind::FieldRun, "field-run"},
    {ExperimentKind::SmallDe, "small-de"},         {ExperimentKind::EnergyAudit, "energy-audit"},
};

bool isFieldKind(ExperimentKind k) { return k == ExperimentKind::FieldRun || k == ExperimentKind::EnergyAudit; }

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : sep) + s;
  return out;
}

// Reads typed values out of a JSON object while accumulating errors.
class Reader {
 public:
  std::vector<std::string> errors;

  bool object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
      errors.push_back(path + ": must be an object");
      return false;
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!ok.count(it.key())) errors.push_back(key(path, it.key()) + ": unknown key");
    return true;
  }

  static std::string key(const std::string& path, const std::string& k) { return path.empty() ? k : path + "." + k; }

  bool number(const json& obj, const std::string& path, const char* k, double& out, bool required = false) {
    if (!obj.contains(k)) {
      if (required) errors.push_back(key(path, k) + ": required key is missing");
      return false;
    }
    const json& v = obj.at(k);
    if (!v.is_number()) {
      errors.push_back(key(path, k) + ": must be a number");
      return false;
    }
    out = v.get<double>();
    return true;
  }

  bool integer(const json& obj, const std::string& path, const char* k, long long& out) {
    if (!obj.contains(k)) return false;
    const json& v = obj.at(k);
    if (!v.is_number_integer()) {
      errors.push_back(key(path, k) + ": must be an integer");
      return false;
    }
    out = v.get<long long>();
    return true;
  }

  bool string(const json& obj, const std::string& path, const char* k, std::string& out) {
    if (!obj.contains(k)) return false;
    const json& v = obj.at(k);
    if (!v.is_string()) {
      errors.push_back(key(path, k) + ": must be a string");
      return false;
    }
    out = v.get<std::string>();
    return true;
  }

  bool numbers(const json& obj, const std::string& path, const char* k, std::vector<double>& out) {
    if (!obj.contains(k)) return false;
    const json& v = obj.at(k);
    if (!v.is_array() || v.empty()) {
      errors.push_back(key(path, k) + ": must be a non-empty array of numbers");
      return false;
    }
    std::vector<double> r;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        errors.push_back(key(path, k) + "[" + std::to_string(i) + "]: must be a number");
        return false;
      }
      r.push_back(v[i].get<double>());
    }
    out = r;
    return true;
  }

  bool vec3(const json& obj, const std::string& path, const char* k, Vec3& out) {
    std::vector<double> v;
    if (!numbers(obj, path, k, v)) return false;
    if (v.size() != 3) {
      errors.push_back(key(path, k) + ": must have 3 entries");
      return false;
    }
    out = {v[0], v[1], v[2]};
    return true;
  }

  bool mat3(const json& obj, const std::string& path, const char* k, Mat3& out) {
    if (!obj.contains(k)) return false;
    const json& v = obj.at(k);
    bool ok = v.is_array() && v.size() == 3;
    for (std::size_t i = 0; ok && i < 3; ++i) {
      ok = v[i].is_array() && v[i].size() == 3;
      for (std::size_t j = 0; ok && j < 3; ++j) ok = v[i][j].is_number();
    }
    if (!ok) {
      errors.push_back(key(path, k) + ": must be a 3x3 array of numbers");
      return false;
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out(i, j) = v[i][j].get<double>();
    return true;
  }

  void check(bool cond, const std::string& path, const std::string& msg) {
    if (!cond) errors.push_back(path + ": " + msg);
  }
};

// Double formatting ---------------------------------------------------------

std::string csvRow(const std::vector<std::string>& cells) { return join(cells, ",") + "\n"; }

json jsonNumber(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

// Output bookkeeping --------------------------------------------------------

class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& data) {
    writeAtomic(dir_ / name, data);
    files_.push_back({name, sha256Hex(data), data.size()});
  }

  void writeSnapshotFile(const std::string& name, const FieldState& s, const Grid2D& g) {
    const fs::path tmp = dir_ / (name + ".tmp");
    writeSnapshot(tmp.string(), s, g);
    std::ifstream in(tmp, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    in.close();
    fs::rename(tmp, dir_ / name);
    const std::string data = buf.str();
    files_.push_back({name, sha256Hex(data), data.size()});
  }

  json fileList() const {
    json a = json::array();
    for (const auto& f : files_) a.push_back({{"path", f.name}, {"sha256", f.hash}, {"bytes", f.bytes}});
    return a;
  }

  const fs::path& dir() const { return dir_; }

 private:
  struct Entry {
    std::string name, hash;
    std::size_t bytes;
  };
  fs::path dir_;
  std::vector<Entry> files_;
};

class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".qlc.lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
      throw ConfigError({"output: directory " + dir.string() +
                         " is locked by another run (remove .qlc.lock if it is stale)"});
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto written = ::write(fd_, pid.data(), pid.size());
  }
  ~DirLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Progress {
  bool quiet;
  void operator()(const std::string& msg) const {
    if (!quiet) std::cerr << "[qlc] " << msg << "\n";
  }
};

double initialOrder(const ModelParams& p) {
  double s = 0.3;
  try {
    s = orderParameters(solveEta(p.alpha, Branch::Stable)).s2;
  } catch (const BranchMissing&) {
  }
  // keep the uniaxial state inside the margin delta
  return std::min(s, 3.0 * (1.0 / 3.0 - p.delta) * (1.0 - 1e-9));
}

// Experiments ----------------------------------------------------------------

json runPhaseTable(const ExperimentConfig& c, OutputDir& out, const Progress& log) {
  const std::vector<std::string> header = {
      "alpha",  "eta",    "S2",     "S4",     "xi1",          "xi2",        "xi3",         "psi1",
      "psi2",   "psi3",   "alpha1", "alpha2", "alpha3",       "alpha4",     "alpha5",      "alpha6",
      "gamma1", "gamma2", "zeta",   "leslie_angle", "k1",     "k2",         "k3",          "k4",
      "coercivity", "critical_residual", "alpha_identity_rel", "ineq_quadratic", "ineq_linear",
      "xi_sum_defect", "parodi_defect", "gamma2_defect", "critical_ok", "alpha_identity_ok", "inequalities_ok",
      "xi_sum_ok", "parodi_ok", "gamma2_ok", "coercivity_ok", "all_pass"};
  std::string csv = csvRow(header);
  json rows = json::array();
  bool all = true;
  for (double alpha : c.alphas) {
    log("phase constants at alpha = " + formatDouble(alpha));
    const PhaseConstants pc = phaseConstants(alpha, c.model.L1, c.model.L2);
    const DirectorContext ctx = makeDirectorContext(Vec3{0.0, 0.0, 1.0}, pc);
    const double coer = coercivityConstant(ctx);
    const double res = criticalResidual(pc.eta, alpha);
    const double aid = std::abs(alpha - pc.a0 / (pc.a2 - pc.a4)) / alpha;
    const double iq = 3 * pc.a2 * pc.a2 + 2 * pc.a0 * pc.a2 - 5 * pc.a0 * pc.a4;
    const double il = 6 * pc.a2 - 5 * pc.a4 - pc.a0;
    const double xs = pc.xi2 + pc.xi3 - 1.0 / alpha;
    const double par = pc.alpha2 + pc.alpha3 - (pc.alpha6 - pc.alpha5);
    const double g2 = pc.gamma2 + pc.s2;
    const auto angle = leslieAngle(pc.zeta);
    const bool ok_c = std::abs(res) <= 1e-10, ok_a = aid <= 1e-8, ok_i = iq > 0 && il > 0,
               ok_x = std::abs(xs) <= 1e-10, ok_p = std::abs(par) <= 1e-12, ok_g = g2 == 0.0, ok_h = coer > 0;
    const bool pass = ok_c && ok_a && ok_i && ok_x && ok_p && ok_g && ok_h;
    all = all && pass;
    const double la = angle ? *angle : std::numeric_limits<double>::quiet_NaN();
    const std::vector<double> vals = {alpha,     pc.eta,    pc.s2,     pc.s4,     pc.xi1,    pc.xi2,   pc.xi3,
                                      pc.psi1,   pc.psi2,   pc.psi3,   pc.alpha1, pc.alpha2, pc.alpha3, pc.alpha4,
                                      pc.alpha5, pc.alpha6, pc.gamma1, pc.gamma2, pc.zeta,   la,        pc.k1,
                                      pc.k2,     pc.k3,     pc.k4,     coer,      res,       aid,       iq,
                                      il,        xs,        par,       g2};
    std::vector<std::string> cells;
    for (double v : vals) cells.push_back(formatDouble(v));
    for (bool b : {ok_c, ok_a, ok_i, ok_x, ok_p, ok_g, ok_h, pass}) cells.push_back(b ? "pass" : "fail");
    csv += csvRow(cells);
    json row;
    for (std::size_t i = 0; i < vals.size(); ++i) row[header[i]] = jsonNumber(vals[i]);
    row["flow_aligning"] = angle.has_value();
    for (std::size_t i = vals.size(); i < header.size(); ++i) row[header[i]] = cells[i] == "pass";
    rows.push_back(row);
  }
  out.write("phase_table.csv", csv);
  const CriticalPoint cp = criticalAlpha();
  json doc = {{"critical_alpha", cp.alpha}, {"critical_eta", cp.eta}, {"rows", rows}};
  out.write("phase_table.json", doc.dump(2) + "\n");
  return {{"all_pass", all}};
}

json runClosureValidate(const ExperimentConfig& c, OutputDir& out, const Progress& log) {
  const SphereQuadrature quad = buildQuadrature(c.quad_polar, c.quad_azimuthal);
  std::mt19937_64 rng(c.seed);
  const double bound01 = spreadBound(0.1);
  const double bound_d = spreadBound(c.closure_delta);
  std::string csv = csvRow({"index", "q11", "q22", "q12", "q13", "q23", "margin", "residual", "roundtrip_error",
                            "mq_identity_error", "spread", "spread_bound", "iterations", "damped"});
  std::vector<double> times;
  double max_rt = 0, max_id = 0, max_spread = 0, max_spread01 = 0;
  int n01 = 0;
  bool bound_ok = true;
  for (int i = 0; i < c.closure_samples; ++i) {
    const QTensor q = samplePhysicalQ(rng, c.closure_delta);
    const auto t0 = std::chrono::steady_clock::now();
    const ClosurePoint cp = solveClosure(q, c.closure_delta, kDefaultClosureTol, quad);
    times.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    const QTensor b = cp.B();
    const BinghamMoments m = momentsOf(b, quad);
    const double rt = (m.q - q).norm();
    const double id = (applyMQ(m, b.matrix()) - 1.5 * q.matrix()).frobenius();
    const double spread = cp.b[2] - cp.b[0];
    const double margin = physicalMargin(q);
    const double bound = margin >= 0.1 ? bound01 : bound_d;
    if (margin >= 0.1) {
      ++n01;
      max_spread01 = std::max(max_spread01, spread);
    }
    bound_ok = bound_ok && spread <= bound;
    max_rt = std::max(max_rt, rt);
    max_id = std::max(max_id, id);
    max_spread = std::max(max_spread, spread);
    std::vector<std::string> cells{std::to_string(i)};
    for (int k = 0; k < 5; ++k) cells.push_back(formatDouble(q[k]));
    for (double v : {margin, cp.residual, rt, id, spread, bound}) cells.push_back(formatDouble(v));
    cells.push_back(std::to_string(cp.iterations));
    cells.push_back(cp.used_damping ? "1" : "0");
    csv += csvRow(cells);
  }
  out.write("closure_samples.csv", csv);
  std::vector<double> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted.empty() ? 0.0 : sorted[sorted.size() / 2];
  const double total = std::accumulate(times.begin(), times.end(), 0.0);
  log("closure: max round-trip error " + formatDouble(max_rt) + ", median solve " + formatDouble(median) + " ms");
  json s = {{"samples", c.closure_samples},
            {"delta", c.closure_delta},
            {"seed", c.seed},
            {"max_roundtrip_error", max_rt},
            {"roundtrip_ok", max_rt <= 1e-10},
            {"max_mq_identity_error", max_id},
            {"mq_identity_ok", max_id <= 1e-8},
            {"max_spread", max_spread},
            {"spread_bound_delta", bound_d},
            {"spread_bound_0.1", bound01},
            {"samples_with_margin_0.1", n01},
            {"max_spread_margin_0.1", max_spread01},
            {"spread_bound_ok", bound_ok},
            {"median_solve_ms", median},
            {"total_solve_s", total / 1000.0}};
  out.write("closure_summary.json", s.dump(2) + "\n");
  return {{"all_pass", max_rt <= 1e-10 && max_id <= 1e-8 && bound_ok}};
}

json runHomogeneous(const ExperimentConfig& c, OutputDir& out, const Progress& log) {
  const SphereQuadrature quad = buildQuadrature(c.quad_polar, c.quad_azimuthal);
  const double dt = c.dt > 0.0 ? c.dt : std::min(0.01, 0.05 * c.model.De);
  const Vec3 n0 = normalized(c.director);
  HomState s{QTensor::uniaxial(initialOrder(c.model), n0), c.kappa, 0.0};
  std::string csv = csvRow({"t", "q11", "q22", "q12", "q13", "q23", "lambda_max", "biaxiality", "n1", "n2", "n3",
                            "margin"});
  Vec3 prev = n0;
  auto emit = [&] {
    const DirectorSample d = extractDirector(s.Q, prev);
    if (!d.flagged) prev = d.n;
    std::vector<std::string> cells{formatDouble(s.t)};
    for (int k = 0; k < 5; ++k) cells.push_back(formatDouble(s.Q[k]));
    for (double v : {eigenDecompose(s.Q).values[2], biaxiality(s.Q), prev[0], prev[1], prev[2], physicalMargin(s.Q)})
      cells.push_back(formatDouble(v));
    csv += csvRow(cells);
  };
  emit();
  std::string failure;
  try {
    for (int k = 0; k < c.steps; ++k) {
      s = stepHomogeneous(s, dt, c.model, quad);
      emit();
    }
  } catch (const std::exception& e) {
    failure = e.what();
  }
  out.write("trajectory.csv", csv);
  json fin = {{"t", s.t}, {"Q", s.Q.components()}, {"director", {prev[0], prev[1], prev[2]}},
              {"biaxiality", biaxiality(s.Q)}};
  out.write("final.json", fin.dump(2) + "\n");
  if (!failure.empty()) throw NumericalFailure("homogeneous run: " + failure);
  log("homogeneous run finished at t = " + formatDouble(s.t));
  return {{"final_t", s.t}};
}

json runField(const ExperimentConfig& c, OutputDir& out, const Progress& log, bool audit) {
  Grid2D grid(c.grid_n);
  FieldOptions fo;
  fo.quad_polar = c.quad_polar;
  fo.quad_azimuthal = c.quad_azimuthal;
  FieldSolver solver(grid, c.model, fo);
  solver.setState(randomSmoothState(grid, initialOrder(c.model), c.velocity_amplitude, c.seed, c.init_modes));
  const double dt = c.dt > 0.0 ? c.dt : defaultTimeStep(solver.state(), grid, c.model);

  std::string csv = csvRow({"step", "t", "kinetic", "bulk", "elastic", "total", "diss_viscous", "diss_closure",
                            "diss_rotational", "dissipation", "min_margin"});
  auto row = [&](int k, double t, const EnergyReport& r) {
    std::vector<std::string> cells{std::to_string(k)};
    for (double v : {t, r.kinetic, r.bulk, r.elastic, r.total, r.diss_viscous, r.diss_closure, r.diss_rotational,
                     r.dissipation(), r.min_margin})
      cells.push_back(formatDouble(v));
    csv += csvRow(cells);
  };
  std::vector<EnergyReport> reports;
  std::string failure;
  int done = 0;
  try {
    for (int k = 0; k < c.steps; ++k) {
      const double t = solver.state().t;
      const EnergyReport r = solver.step(dt);
      row(k, t, r);
      reports.push_back(r);
      ++done;
      if (c.snapshot_every > 0 && (k + 1) % c.snapshot_every == 0) {
        char name[40];
        std::snprintf(name, sizeof name, "step_%06d.qlcf", k + 1);
        out.writeSnapshotFile(name, solver.state(), grid);
      }
      if ((k + 1) % std::max(1, c.steps / 10) == 0)
        log("step " + std::to_string(k + 1) + "/" + std::to_string(c.steps) + " E = " + formatDouble(r.total));
    }
    const EnergyReport r = solver.energy();
    row(c.steps, solver.state().t, r);
    reports.push_back(r);
  } catch (const std::exception& e) {
    failure = e.what();
  }
  out.write("energy.csv", csv);
  out.writeSnapshotFile("final_state.qlcf", solver.state(), grid);
  const json sidecar = {{"t", solver.state().t},
                        {"grid_n", c.grid_n},
                        {"length", grid.length()},
                        {"components", {"q11", "q22", "q12", "q13", "q23", "v1", "v2", "v3"}},
                        {"model",
                         {{"alpha", c.model.alpha},
                          {"epsilon", c.model.epsilon},
                          {"De", c.model.De},
                          {"Re", c.model.Re},
                          {"gamma", c.model.gamma},
                          {"L1", c.model.L1},
                          {"L2", c.model.L2},
                          {"delta", c.model.delta}}}};
  out.write("final_state.json", sidecar.dump(2) + "\n");

  json summary = {{"dt", dt},
                  {"steps_completed", done},
                  {"final_t", solver.state().t},
                  {"halvings", solver.halvings()},
                  {"divergence_residual", solver.divergenceResidual()}};
  bool pass = failure.empty();
  if (reports.size() >= 2) {
    int increases = 0;
    double worst = -std::numeric_limits<double>::infinity(), min_margin = reports[0].min_margin, cum = 0.0;
    for (std::size_t k = 1; k < reports.size(); ++k) {
      const double e0 = reports[k - 1].total, e1 = reports[k].total;
      const double rel = (e1 - e0) / std::max(std::abs(e0), 1e-300);
      worst = std::max(worst, rel);
      if (rel > 1e-10) ++increases;
      cum += 0.5 * dt * (reports[k - 1].dissipation() + reports[k].dissipation());
      min_margin = std::min(min_margin, reports[k].min_margin);
    }
    const double drop = reports.front().total - reports.back().total;
    const double mismatch = cum > 0 ? std::abs(drop - cum) / cum : std::abs(drop);
    summary["energy_initial"] = reports.front().total;
    summary["energy_final"] = reports.back().total;
    summary["energy_drop"] = drop;
    summary["integrated_dissipation"] = cum;
    summary["dissipation_mismatch_rel"] = mismatch;
    summary["max_relative_increase"] = worst;
    summary["steps_with_increase"] = increases;
    summary["min_margin"] = min_margin;
    summary["monotone_ok"] = increases == 0;
    summary["dissipation_match_ok"] = mismatch <= 0.01;
    summary["margin_ok"] = min_margin >= 0.5 * c.model.delta;
    if (audit) pass = pass && increases == 0 && mismatch <= 0.01 && min_margin >= 0.5 * c.model.delta;
  }
  if (!failure.empty()) summary["error"] = failure;
  if (audit) summary["all_pass"] = pass;
  out.write(audit ? "audit.json" : "summary.json", summary.dump(2) + "\n");
  if (!failure.empty()) throw NumericalFailure("field run: " + failure);
  if (audit && !pass) throw NumericalFailure("energy audit failed, see audit.json");
  return summary;
}

json runSmallDe(const ExperimentConfig& c, OutputDir& out, const Progress& log) {
  const SphereQuadrature quad = buildQuadrature(c.quad_polar, c.quad_azimuthal);
  SmallDeOptions o;
  o.t_final = c.t_final;
  o.dt_factor = c.dt_factor;
  o.n0 = c.sd_director;
  const Mat3 kappa = simpleShear(c.shear_rate);
  std::vector<ConvergenceRow> rows(c.de_list.size());
  std::mutex mu;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lk(mu);
        if (next >= rows.size()) return;
        i = next++;
      }
      const ConvergenceTable t = smallDeExperiment(c.model, {c.de_list[i]}, kappa, o, quad);
      rows[i] = t.rows.at(0);
      std::lock_guard<std::mutex> lk(mu);
      log("small-De row De = " + formatDouble(c.de_list[i]) + " err = " + formatDouble(rows[i].sup_angle_err));
    }
  };
  const int nt = std::max(1, std::min<int>(c.threads, static_cast<int>(rows.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<double> xs, ys;
  std::string csv = csvRow({"De", "sup_angle_err", "sup_biaxiality", "fitted_slope_running"});
  json jrows = json::array();
  for (auto& r : rows) {
    if (r.ok) {
      xs.push_back(r.De);
      ys.push_back(r.sup_angle_err);
    }
    r.fitted_slope_running = logLogSlope(xs, ys);
    csv += csvRow({formatDouble(r.De), r.ok ? formatDouble(r.sup_angle_err) : "nan",
                   r.ok ? formatDouble(r.sup_biaxiality) : "nan", formatDouble(r.fitted_slope_running)});
    json jr = {{"De", r.De},
               {"sup_angle_err", jsonNumber(r.ok ? r.sup_angle_err : NAN)},
               {"sup_biaxiality", jsonNumber(r.ok ? r.sup_biaxiality : NAN)},
               {"fitted_slope_running", jsonNumber(r.fitted_slope_running)}};
    if (!r.ok) jr["error"] = r.error;
    jrows.push_back(jr);
  }
  const double slope = logLogSlope(xs, ys);
  const PhaseConstants pc = phaseConstants(c.model.alpha, c.model.L1, c.model.L2);
  json doc = {{"alpha", c.model.alpha}, {"zeta", pc.zeta}, {"shear_rate", c.shear_rate},
              {"t_final", c.t_final},   {"slope", jsonNumber(slope)}, {"rows", jrows}};
  out.write("convergence.csv", csv);
  out.write("convergence.json", doc.dump(2) + "\n");
  for (const auto& r : rows)
    if (!r.ok) throw NumericalFailure("small-De row De = " + formatDouble(r.De) + ": " + r.error);
  return {{"slope", jsonNumber(slope)}};
}

json versions() {
  json v;
  v["qlc"] = kVersion;
  v["fftw"] = std::string(fftw_version);
  v["openssl"] = std::string(OpenSSL_version(OPENSSL_VERSION));
  v["compiler"] = std::string(__VERSION__);
  return v;
}

std::string utcNow() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

const char* kindName(ExperimentKind k) {
  for (const auto& e : kKinds)
    if (e.kind == k) return e.name;
  return "unknown";
}

std::optional<ExperimentKind> kindFromName(const std::string& s) {
  for (const auto& e : kKinds)
    if (s == e.name) return e.kind;
  return std::nullopt;
}

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join(errors, "\n")), errors_(std::move(errors)) {}

std::string formatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void writeAtomic(const fs::path& path, const std::string& data) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string());
    os.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!os) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string sha256Hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

ExperimentConfig validateConfig(const std::string& text, std::optional<ExperimentKind> forced) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("config: invalid JSON: ") + e.what()});
  }
  Reader r;
  ExperimentConfig c;
  if (!r.object(j, "config",
                {"experiment", "seed", "output", "threads", "model", "quadrature", "grid", "time", "phase_table",
                 "closure", "homogeneous", "small_de", "field"}))
    throw ConfigError(r.errors);

  std::string name;
  if (r.string(j, "", "experiment", name)) {
    const auto k = kindFromName(name);
    if (!k)
      r.errors.push_back("experiment: unknown kind '" + name + "'");
    else if (forced && *k != *forced)
      r.errors.push_back("experiment: config says '" + name + "' but the command is '" + kindName(*forced) + "'");
    else
      c.kind = *k;
  } else if (forced) {
    c.kind = *forced;
  } else if (!j.contains("experiment")) {
    r.errors.push_back("experiment: required key is missing");
  }
  if (forced) c.kind = *forced;
  if (isFieldKind(c.kind)) {
    c.quad_polar = 24;
    c.quad_azimuthal = 48;
  }
  if (c.kind == ExperimentKind::SmallDe) c.model.alpha = 7.0;
  if (c.kind == ExperimentKind::HomogeneousRun) c.steps = 1000;

  long long iv;
  if (r.integer(j, "", "seed", iv)) {
    r.check(iv >= 0, "seed", "must be non-negative");
    c.seed = static_cast<std::uint64_t>(iv);
  }
  r.string(j, "", "output", c.output);
  r.check(!c.output.empty(), "output", "must not be empty");
  if (r.integer(j, "", "threads", iv)) {
    r.check(iv >= 1 && iv <= 1024, "threads", "must lie in [1, 1024]");
    c.threads = static_cast<int>(iv);
  }

  const bool needs_model = c.kind == ExperimentKind::HomogeneousRun || isFieldKind(c.kind);
  if (j.contains("model")) {
    const json& m = j["model"];
    if (r.object(m, "model", {"alpha", "epsilon", "De", "Re", "gamma", "L1", "L2", "delta"})) {
      r.number(m, "model", "alpha", c.model.alpha, needs_model);
      r.number(m, "model", "epsilon", c.model.epsilon);
      r.number(m, "model", "De", c.model.De, needs_model);
      r.number(m, "model", "Re", c.model.Re);
      r.number(m, "model", "gamma", c.model.gamma);
      r.number(m, "model", "L1", c.model.L1);
      r.number(m, "model", "L2", c.model.L2);
      r.number(m, "model", "delta", c.model.delta);
    }
  } else if (needs_model) {
    r.errors.push_back("model.alpha: required key is missing");
    r.errors.push_back("model.De: required key is missing");
  }
  for (const auto& v : c.model.violations()) {
    const std::string key = v.substr(0, v.find(' '));
    r.errors.push_back("model." + key + ": " + v);
  }

  if (j.contains("quadrature")) {
    const json& q = j["quadrature"];
    if (r.object(q, "quadrature", {"polar", "azimuthal"})) {
      if (r.integer(q, "quadrature", "polar", iv)) c.quad_polar = static_cast<int>(std::clamp(iv, -1LL, 100000LL));
      if (r.integer(q, "quadrature", "azimuthal", iv))
        c.quad_azimuthal = static_cast<int>(std::clamp(iv, -1LL, 100000LL));
    }
  }
  r.check(c.quad_polar >= 8 && c.quad_polar <= 4096, "quadrature.polar", "must lie in [8, 4096]");
  r.check(c.quad_azimuthal >= 16 && c.quad_azimuthal <= 8192 && c.quad_azimuthal % 2 == 0, "quadrature.azimuthal",
          "must be even and lie in [16, 8192]");

  if (j.contains("grid")) {
    const json& g = j["grid"];
    if (r.object(g, "grid", {"n"}) && r.integer(g, "grid", "n", iv))
      c.grid_n = static_cast<int>(std::clamp(iv, -1LL, 100000LL));
  }
  r.check(c.grid_n >= 8 && c.grid_n <= 4096 && c.grid_n % 2 == 0, "grid.n", "must be even and lie in [8, 4096]");

  if (j.contains("time")) {
    const json& t = j["time"];
    if (r.object(t, "time", {"dt", "steps", "t_final"})) {
      r.number(t, "time", "dt", c.dt);
      if (r.integer(t, "time", "steps", iv)) c.steps = static_cast<int>(std::clamp(iv, -1LL, 100000000LL));
      r.number(t, "time", "t_final", c.t_final);
    }
  }
  r.check(std::isfinite(c.dt) && c.dt >= 0.0, "time.dt", "must be positive (or 0 for the automatic step)");
  r.check(c.steps >= 1, "time.steps", "must be at least 1");
  r.check(std::isfinite(c.t_final) && c.t_final > 0.0, "time.t_final", "must be positive");

  if (j.contains("phase_table")) {
    const json& p = j["phase_table"];
    if (r.object(p, "phase_table", {"alphas"})) r.numbers(p, "phase_table", "alphas", c.alphas);
  }
  if (c.kind == ExperimentKind::PhaseTable) {
    const double acrit = criticalAlpha().alpha;
    for (std::size_t i = 0; i < c.alphas.size(); ++i)
      r.check(std::isfinite(c.alphas[i]) && c.alphas[i] > acrit && c.alphas[i] <= 200.0,
              "phase_table.alphas[" + std::to_string(i) + "]",
              "alpha must lie in (" + formatDouble(acrit) + ", 200] for a nematic branch to exist");
  }

  if (j.contains("closure")) {
    const json& p = j["closure"];
    if (r.object(p, "closure", {"samples", "delta"})) {
      if (r.integer(p, "closure", "samples", iv)) c.closure_samples = static_cast<int>(std::clamp(iv, -1LL, 100000000LL));
      r.number(p, "closure", "delta", c.closure_delta);
    }
  }
  r.check(c.closure_samples >= 1, "closure.samples", "must be at least 1");
  r.check(c.closure_delta > 0.0 && c.closure_delta < 1.0 / 3.0, "closure.delta", "must lie in (0,1/3)");

  if (j.contains("homogeneous")) {
    const json& h = j["homogeneous"];
    if (r.object(h, "homogeneous", {"kappa", "director"})) {
      r.mat3(h, "homogeneous", "kappa", c.kappa);
      r.vec3(h, "homogeneous", "director", c.director);
    }
  }
  r.check(std::abs(c.kappa.trace()) <= 1e-12, "homogeneous.kappa", "must be traceless");
  r.check(norm(c.director) > 1e-12, "homogeneous.director", "must be nonzero");

  if (j.contains("small_de")) {
    const json& s = j["small_de"];
    if (r.object(s, "small_de", {"De_list", "shear_rate", "dt_factor", "director"})) {
      r.numbers(s, "small_de", "De_list", c.de_list);
      r.number(s, "small_de", "shear_rate", c.shear_rate);
      r.number(s, "small_de", "dt_factor", c.dt_factor);
      r.vec3(s, "small_de", "director", c.sd_director);
    }
  }
  for (std::size_t i = 0; i < c.de_list.size(); ++i) {
    const std::string key = "small_de.De_list[" + std::to_string(i) + "]";
    r.check(c.de_list[i] > 0.0 && c.de_list[i] < 0.5, key, "must lie in (0, 0.5)");
    if (i > 0) r.check(c.de_list[i] < c.de_list[i - 1], key, "list must be decreasing");
  }
  r.check(std::isfinite(c.shear_rate) && c.shear_rate != 0.0, "small_de.shear_rate", "must be nonzero");
  r.check(c.dt_factor > 0.0 && c.dt_factor <= 0.5, "small_de.dt_factor", "must lie in (0, 0.5]");
  r.check(norm(c.sd_director) > 1e-12, "small_de.director", "must be nonzero");
  if (c.kind == ExperimentKind::SmallDe && c.model.violations().empty()) {
    try {
      const PhaseConstants pc = phaseConstants(c.model.alpha, c.model.L1, c.model.L2);
      r.check(pc.zeta > 1.0, "model.alpha",
              "small-de needs a flow-aligning material (zeta = " + formatDouble(pc.zeta) + " <= 1)");
    } catch (const std::exception& e) {
      r.errors.push_back(std::string("model.alpha: ") + e.what());
    }
  }

  if (j.contains("field")) {
    const json& f = j["field"];
    if (r.object(f, "field", {"velocity_amplitude", "init_modes", "snapshot_every"})) {
      r.number(f, "field", "velocity_amplitude", c.velocity_amplitude);
      if (r.integer(f, "field", "init_modes", iv)) c.init_modes = static_cast<int>(std::clamp(iv, -1LL, 100000LL));
      if (r.integer(f, "field", "snapshot_every", iv))
        c.snapshot_every = static_cast<int>(std::clamp(iv, -1LL, 100000000LL));
    }
  }
  r.check(std::isfinite(c.velocity_amplitude) && c.velocity_amplitude >= 0.0, "field.velocity_amplitude",
          "must be non-negative");
  r.check(c.init_modes >= 1 && c.init_modes <= c.grid_n / 3, "field.init_modes", "must lie in [1, grid.n / 3]");
  r.check(c.snapshot_every >= 0, "field.snapshot_every", "must be non-negative");

  if (!r.errors.empty()) throw ConfigError(r.errors);
  return c;
}

std::string configToJson(const ExperimentConfig& c) {
  json k = json::array();
  for (int i = 0; i < 3; ++i) k.push_back({c.kappa(i, 0), c.kappa(i, 1), c.kappa(i, 2)});
  json j = {
      {"experiment", kindName(c.kind)},
      {"seed", c.seed},
      {"output", c.output},
      {"threads", c.threads},
      {"model",
       {{"alpha", c.model.alpha},
        {"epsilon", c.model.epsilon},
        {"De", c.model.De},
        {"Re", c.model.Re},
        {"gamma", c.model.gamma},
        {"L1", c.model.L1},
        {"L2", c.model.L2},
        {"delta", c.model.delta}}},
      {"quadrature", {{"polar", c.quad_polar}, {"azimuthal", c.quad_azimuthal}}},
      {"grid", {{"n", c.grid_n}}},
      {"time", {{"dt", c.dt}, {"steps", c.steps}, {"t_final", c.t_final}}},
      {"phase_table", {{"alphas", c.alphas}}},
      {"closure", {{"samples", c.closure_samples}, {"delta", c.closure_delta}}},
      {"homogeneous", {{"kappa", k}, {"director", {c.director[0], c.director[1], c.director[2]}}}},
      {"small_de",
       {{"De_list", c.de_list},
        {"shear_rate", c.shear_rate},
        {"dt_factor", c.dt_factor},
        {"director", {c.sd_director[0], c.sd_director[1], c.sd_director[2]}}}},
      {"field",
       {{"velocity_amplitude", c.velocity_amplitude},
        {"init_modes", c.init_modes},
        {"snapshot_every", c.snapshot_every}}},
  };
  return j.dump(2);
}

int runExperiment(const ExperimentConfig& config, const RunOptions& opts) {
  const Progress log{opts.quiet};
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir(config.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    std::cerr << "error: output: cannot create directory " << dir.string() << "\n";
    return 2;
  }
  std::optional<DirLock> lock;
  try {
    lock.emplace(dir);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  OutputDir out(dir);
  const std::string cfg = configToJson(config);
  json manifest = {{"tool", "qlc"},
                   {"experiment", kindName(config.kind)},
                   {"started_utc", utcNow()},
                   {"config", json::parse(cfg)},
                   {"config_sha256", sha256Hex(cfg)},
                   {"seed", config.seed},
                   {"versions", versions()}};
  int code = 0;
  json result;
  try {
    log(std::string("running ") + kindName(config.kind) + " into " + dir.string());
    switch (config.kind) {
      case ExperimentKind::PhaseTable:
        result = runPhaseTable(config, out, log);
        break;
      case ExperimentKind::ClosureValidate:
        result = runClosureValidate(config, out, log);
        break;
      case ExperimentKind::HomogeneousRun:
        result = runHomogeneous(config, out, log);
        break;
      case ExperimentKind::FieldRun:
        result = runField(config, out, log, false);
        break;
      case ExperimentKind::EnergyAudit:
        result = runField(config, out, log, true);
        break;
      case ExperimentKind::SmallDe:
        result = runSmallDe(config, out, log);
        break;
    }
    manifest["status"] = "ok";
  } catch (const std::invalid_argument& e) {
    manifest["status"] = "config-error";
    manifest["error"] = e.what();
    std::cerr << "error: " << e.what() << "\n";
    code = 2;
  } catch (const std::exception& e) {
    manifest["status"] = "numerical-failure";
    manifest["error"] = e.what();
    std::cerr << "numerical failure: " << e.what() << "\n";
    code = 3;
  }
  manifest["result"] = result;
  manifest["files"] = out.fileList();
  manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    writeAtomic(dir / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "error: cannot write manifest: " << e.what() << "\n";
    if (code == 0) code = 3;
  }
  return code;
}

}  // namespace qlc
