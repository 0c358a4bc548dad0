// rng.h
//
// Seeded generators used for every randomly initialized table or weight.
// The standard <random> distributions are implementation-defined, so the
// transforms below are spelled out to keep weight files identical across
// standard libraries.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "dsff/common.h"

namespace dsff {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Box-Muller; one draw per call, the sine branch is discarded.
  double Gaussian(double mean = 0.0, double stddev = 1.0) {
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  std::uint64_t Next() { return engine_(); }

  Matrix UniformMatrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Uniform(lo, hi);
    return m;
  }

  Matrix GaussianMatrix(Eigen::Index rows, Eigen::Index cols, double stddev) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Gaussian(0.0, stddev);
    return m;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dsff
