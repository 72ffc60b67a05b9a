#pragma once

// Seeding and sampling helpers. Every random stream is derived from a master
// seed by stable indexing, so results never depend on scheduling.

#include "dirbit/common.hpp"

#include <cstdint>
#include <random>

namespace dirbit {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t i, std::uint64_t j) {
  return derive_seed(derive_seed(master, i), j);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

inline Vec gaussian_vector(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

inline Mat gaussian_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

/// Uniform direction on the unit sphere S^{d-1}; for d = 1 a fair sign.
inline Vec random_unit_vector(int d, Rng& rng) {
  if (d == 1) {
    std::bernoulli_distribution coin(0.5);
    return Vec::Constant(1, coin(rng) ? 1.0 : -1.0);
  }
  Vec v;
  do {
    v = gaussian_vector(d, rng);
  } while (v.norm() < 1e-12);
  return v.normalized();
}

/// Uniform point in the unit ball of dimension d.
inline Vec random_ball_point(int d, Rng& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  return random_unit_vector(d, rng) * std::pow(uni(rng), 1.0 / d);
}

inline Mat random_antisymmetric(int d, Rng& rng) {
  const Mat g = gaussian_matrix(d, d, rng);
  return g - g.transpose();
}

}  // namespace dirbit
