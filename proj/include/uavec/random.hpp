#pragma once

#include <cstdint>
#include <random>

namespace uavec {

/// The random stream type threaded through every sampling routine.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; spreads nearby seeds across the state space.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed of replication `run` under `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run) {
  return splitmix64(splitmix64(master) ^ splitmix64(run + 0x632BE59BD9B4E019ull));
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace uavec
