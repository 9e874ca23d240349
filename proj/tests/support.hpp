#pragma once

#include <cmath>
#include <random>

#include "qlc/tensor.hpp"

namespace qlc::test {

inline Mat3 randomMat(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Mat3 m;
  for (double& a : m.a) a = u(rng);
  return m;
}

inline QTensor randomQ(std::mt19937_64& rng, double scale = 1.0) { return QTensor::fromMatrix(randomMat(rng, scale)); }

inline Vec3 randomUnit(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec3 v{nd(rng), nd(rng), nd(rng)};
  return normalized(v);
}

inline double maxAbs(const Mat3& m) {
  double r = 0.0;
  for (double a : m.a) r = std::max(r, std::abs(a));
  return r;
}

inline double kd(int i, int j) { return i == j ? 1.0 : 0.0; }

}  // namespace qlc::test
