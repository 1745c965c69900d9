#pragma once

// Reproducible random streams.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Doubles are formed from the top 53 bits of each draw,
// u = (bits >> 11) * 2^-53 in [0, 1), and mapped affinely to [lo, hi).
// Standard-library distributions are avoided because their algorithms are
// implementation-defined.

#include "rescycle/vectorspace.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace rescycle {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// Standard normal via Box-Muller (one draw per call).
  double normal() {
    double u1 = unit();
    while (u1 <= 0.0) u1 = unit();
    const double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vector uniform_vector(std::size_t n, double lo, double hi) {
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = uniform(lo, hi);
    return v;
  }

  Vector normal_vector(std::size_t n) {
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal();
    return v;
  }

  Matrix normal_matrix(std::size_t rows, std::size_t cols) {
    Matrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = normal();
    return a;
  }

  ProductPoint uniform_point(std::size_t blocks, std::size_t dim, double lo, double hi) {
    return ProductPoint::from_flat(uniform_vector(blocks * dim, lo, hi), blocks);
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rescycle
