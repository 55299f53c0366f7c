#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <random>

namespace w2slab {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; mixes a master seed with stream indices into a child seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix_seed(master);
  for (auto p : path) s = mix_seed(s ^ mix_seed(p + 0x632be59bd9b4e019ULL));
  return s;
}

/// Matrix with iid N(0, variance) entries, filled column-major.
inline Eigen::MatrixXd gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                       double variance = 1.0) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

inline Eigen::VectorXd gaussian_vector(Rng& rng, Eigen::Index n, double variance = 1.0) {
  return gaussian_matrix(rng, n, 1, variance);
}

}  // namespace w2slab
