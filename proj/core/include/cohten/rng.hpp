// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

#include "cohten/tensor.hpp"

namespace cohten {

/// Mixes a base seed with a stream index so derived streams are decorrelated.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Circular complex standard normal: real and imaginary parts are
/// independent N(0, 1/2), so E|z|^2 = 1.
inline cx complex_gaussian(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(rng);
  const double im = n(rng);
  return cx(re, im) / std::sqrt(2.0);
}

/// Random unit vector in C^m, uniform on the sphere.
inline Eigen::VectorXcd random_unit_vector(std::mt19937_64& rng, int m) {
  Eigen::VectorXcd v(m);
  do {
    for (int i = 0; i < m; ++i) v(i) = complex_gaussian(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

/// Matrix with independent random unit columns.
inline Eigen::MatrixXcd random_unit_columns(std::mt19937_64& rng, int m,
                                            int r) {
  Eigen::MatrixXcd a(m, r);
  for (int p = 0; p < r; ++p) a.col(p) = random_unit_vector(rng, m);
  return a;
}

}  // namespace cohten
