#include "qlc/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace qlc {

Grid2D::Grid2D(int n) : n_(n) {
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("grid size must be even and at least 4");
  real_buf_ = fftw_alloc_real(realSize());
  fftw_complex* spec = fftw_alloc_complex(specSize());
  spec_buf_ = spec;
  plan_fwd_ = fftw_plan_dft_r2c_2d(n_, n_, real_buf_, spec, FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_c2r_2d(n_, n_, spec, real_buf_, FFTW_ESTIMATE);
}

Grid2D::~Grid2D() {
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  fftw_free(real_buf_);
  fftw_free(spec_buf_);
}

double Grid2D::length() const { return 2.0 * std::numbers::pi; }

bool Grid2D::kept(std::size_t m) const {
  const int c = cutoff();
  return std::abs(kx(m)) <= c && std::abs(ky(m)) <= c;
}

void Grid2D::forward(const RealField& in, SpecField& out) const {
  std::memcpy(real_buf_, in.data(), realSize() * sizeof(double));
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  out.resize(specSize());
  std::memcpy(static_cast<void*>(out.data()), spec_buf_, specSize() * sizeof(fftw_complex));
}

void Grid2D::inverse(const SpecField& in, RealField& out) const {
  std::memcpy(spec_buf_, in.data(), specSize() * sizeof(fftw_complex));
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  out.resize(realSize());
  const double s = 1.0 / static_cast<double>(realSize());
  for (std::size_t p = 0; p < realSize(); ++p) out[p] = s * real_buf_[p];
}

void Grid2D::derivative(const SpecField& in, SpecField& out, int dir) const {
  out.resize(specSize());
  for (std::size_t m = 0; m < specSize(); ++m) {
    if (nyquist(m)) {
      out[m] = 0.0;
      continue;
    }
    const double k = dir == 0 ? kx(m) : ky(m);
    out[m] = std::complex<double>(0.0, k) * in[m];
  }
}

void Grid2D::truncate(SpecField& f) const {
  for (std::size_t m = 0; m < specSize(); ++m)
    if (!kept(m)) f[m] = 0.0;
}

RealField Grid2D::derivative(const RealField& f, int dir) const {
  SpecField s, ds;
  forward(f, s);
  derivative(s, ds, dir);
  RealField out;
  inverse(ds, out);
  return out;
}

double Grid2D::integrate(const RealField& f) const {
  double s = 0.0;
  for (double v : f) s += v;
  return s * cellArea();
}

RealField resample(const RealField& f, const Grid2D& from, const Grid2D& to) {
  SpecField a;
  from.forward(f, a);
  SpecField b = to.zeroSpec();
  const double scale = static_cast<double>(to.realSize()) / static_cast<double>(from.realSize());
  const int kmax = std::min(from.n(), to.n()) / 2 - 1;
  for (std::size_t m = 0; m < from.specSize(); ++m) {
    const int kx = from.kx(m), ky = from.ky(m);
    if (kx > kmax || std::abs(ky) > kmax) continue;
    const std::size_t iy = ky >= 0 ? ky : ky + to.n();
    b[iy * to.nkx() + kx] = scale * a[m];
  }
  RealField out;
  to.inverse(b, out);
  return out;
}

QField zeroQField(const Grid2D& g) {
  QField q;
  for (auto& c : q) c = g.zeroReal();
  return q;
}

VecField zeroVecField(const Grid2D& g) {
  VecField v;
  for (auto& c : v) c = g.zeroReal();
  return v;
}

QTensor qAt(const QField& q, std::size_t p) {
  return QTensor::fromComponents(q[0][p], q[1][p], q[2][p], q[3][p], q[4][p]);
}

void setQ(QField& q, std::size_t p, const QTensor& v) {
  for (int c = 0; c < 5; ++c) q[c][p] = v[c];
}

QGradient gradient(const QField& q, const Grid2D& g) {
  QGradient grad;
  SpecField s, ds;
  for (int c = 0; c < 5; ++c) {
    g.forward(q[c], s);
    for (int d = 0; d < 2; ++d) {
      g.derivative(s, ds, d);
      g.inverse(ds, grad[c][d]);
    }
  }
  return grad;
}

PointGradient pointGradient(const QGradient& grad, std::size_t p) {
  PointGradient out{};
  for (int d = 0; d < 2; ++d) {
    const double a = grad[0][d][p], b = grad[1][d][p];
    auto& m = out[d];
    m[0][0] = a;
    m[1][1] = b;
    m[2][2] = -a - b;
    m[0][1] = m[1][0] = grad[2][d][p];
    m[0][2] = m[2][0] = grad[3][d][p];
    m[1][2] = m[2][1] = grad[4][d][p];
  }
  return out;
}

QField ellOperator(const QField& q, const Grid2D& g, double L1, double L2) {
  std::array<SpecField, 5> s;
  for (int c = 0; c < 5; ++c) g.forward(q[c], s[c]);
  std::array<SpecField, 5> out;
  for (auto& o : out) o = g.zeroSpec();
  using C = std::complex<double>;
  for (std::size_t m = 0; m < g.specSize(); ++m) {
    if (g.nyquist(m)) continue;
    const double k[3] = {static_cast<double>(g.kx(m)), static_cast<double>(g.ky(m)), 0.0};
    const double k2 = k[0] * k[0] + k[1] * k[1];
    C qm[3][3];
    qm[0][0] = s[0][m];
    qm[1][1] = s[1][m];
    qm[2][2] = -s[0][m] - s[1][m];
    qm[0][1] = qm[1][0] = s[2][m];
    qm[0][2] = qm[2][0] = s[3][m];
    qm[1][2] = qm[2][1] = s[4][m];
    C w[3];
    for (int i = 0; i < 3; ++i) w[i] = k[0] * qm[i][0] + k[1] * qm[i][1];
    C l[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) l[i][j] = L1 * k2 * qm[i][j] + L2 * (k[j] * w[i] + k[i] * w[j]);
    const C tr = (l[0][0] + l[1][1] + l[2][2]) / 3.0;
    out[0][m] = l[0][0] - tr;
    out[1][m] = l[1][1] - tr;
    out[2][m] = l[0][1];
    out[3][m] = l[0][2];
    out[4][m] = l[1][2];
  }
  QField r;
  for (int c = 0; c < 5; ++c) g.inverse(out[c], r[c]);
  return r;
}

Mat3 distortionStressAt(const PointGradient& gq, const PointGradient& gqt, double L1, double L2) {
  // Divergence Q_km,m is the same for all (j, i); d_z terms vanish.
  double divq[3];
  for (int k = 0; k < 3; ++k) divq[k] = gq[0][k][0] + gq[1][k][1];
  Mat3 s;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) {
      double t1 = 0.0, t2 = 0.0, t3 = 0.0;
      for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) {
          t1 += gq[j][k][l] * gqt[i][k][l];
          t3 += gq[l][k][j] * gqt[i][k][l];
        }
        t2 += divq[k] * gqt[i][k][j];
      }
      s(j, i) = -(L1 * t1 + L2 * t2 + L2 * t3);
    }
  return s;
}

std::array<RealField, 9> distortionStress(const QField& q, const QField& qt, const Grid2D& g, double L1, double L2) {
  const QGradient a = gradient(q, g);
  const QGradient b = gradient(qt, g);
  std::array<RealField, 9> out;
  for (auto& o : out) o = g.zeroReal();
  for (std::size_t p = 0; p < g.realSize(); ++p) {
    const Mat3 s = distortionStressAt(pointGradient(a, p), pointGradient(b, p), L1, L2);
    for (int e = 0; e < 9; ++e) out[e][p] = s.a[e];
  }
  return out;
}

double elasticDensityAt(const PointGradient& gq, double L1, double L2) {
  double g2 = 0.0, t1 = 0.0, t2 = 0.0;
  for (int d = 0; d < 3; ++d)
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l) g2 += gq[d][k][l] * gq[d][k][l];
  // d_i Q_ik d_j Q_jk and d_i Q_jk d_j Q_ik
  for (int k = 0; k < 3; ++k) {
    double a = 0.0;
    for (int i = 0; i < 3; ++i) a += gq[i][i][k];
    t1 += a * a;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) t2 += gq[i][j][k] * gq[j][i][k];
  return 0.5 * (L1 * g2 + L2 * (t1 + t2));
}

double elasticEnergy(const QField& q, const Grid2D& g, double L1, double L2) {
  const QGradient grad = gradient(q, g);
  double s = 0.0;
  for (std::size_t p = 0; p < g.realSize(); ++p) s += elasticDensityAt(pointGradient(grad, p), L1, L2);
  return s * g.cellArea();
}

double oseenFrankEnergy(const VecField& n, const FrankConstants& k, const Grid2D& g) {
  for (std::size_t p = 0; p < g.realSize(); ++p) {
    const double len = std::sqrt(n[0][p] * n[0][p] + n[1][p] * n[1][p] + n[2][p] * n[2][p]);
    if (std::abs(len - 1.0) > 1e-10) throw std::invalid_argument("director field is not unit length");
  }
  // dn[d][i] = d_d n_i
  std::array<std::array<RealField, 3>, 2> dn;
  for (int d = 0; d < 2; ++d)
    for (int i = 0; i < 3; ++i) dn[d][i] = g.derivative(n[i], d);
  double total = 0.0;
  for (std::size_t p = 0; p < g.realSize(); ++p) {
    double grad[3][3] = {};
    for (int d = 0; d < 2; ++d)
      for (int i = 0; i < 3; ++i) grad[d][i] = dn[d][i][p];
    const Vec3 v{n[0][p], n[1][p], n[2][p]};
    const double div = grad[0][0] + grad[1][1];
    // curl_i = eps_ijk d_j n_k
    const Vec3 curl{grad[1][2] - grad[2][1], grad[2][0] - grad[0][2], grad[0][1] - grad[1][0]};
    const double twist = dot(v, curl);
    const Vec3 bend = cross(v, curl);
    double trsq = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trsq += grad[i][j] * grad[j][i];
    total += 0.5 * k.k1 * div * div + 0.5 * k.k2 * twist * twist + 0.5 * k.k3 * dot(bend, bend) +
             0.5 * (k.k2 + k.k4) * (trsq - div * div);
  }
  return total * g.cellArea();
}

}  // namespace qlc
