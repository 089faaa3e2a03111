#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace bayesseg {

using Rng = std::mt19937_64;

// Independent stream seeds from one base seed (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Index drawn proportionally to non-negative weights (not necessarily
// normalized). Returns -1 if all weights are zero.
inline int draw_categorical(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  int last = -1;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    total += weights[k];
    if (weights[k] > 0.0) last = static_cast<int>(k);
  }
  if (last < 0) return -1;
  const double target = uniform01(rng) * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (target < acc && weights[k] > 0.0) return static_cast<int>(k);
  }
  return last;
}

}  // namespace bayesseg
