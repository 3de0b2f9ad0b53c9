#pragma once

#include <cstdint>
#include <random>

#include "types.hpp"

namespace mafe {

/// Derives an independent child seed from (seed, stream) with a splitmix64 step,
/// so repeated runs / sweep dimensions get decorrelated but reproducible streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// rows x cols matrix of i.i.d. N(0, stddev^2) draws.  Entries are generated
/// point-by-point, coordinate-by-coordinate (row-major order), so the layout is
/// part of the reproducibility contract.
inline Matrix sample_normal_matrix(Index rows, Index cols, double stddev, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  return out;
}

}  // namespace mafe
