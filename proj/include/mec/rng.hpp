#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mec {

// Hand-rolled draws on top of mt19937_64 so streams are reproducible across
// standard libraries (std::*_distribution sequences are implementation
// defined) and carry no hidden state between calls.

inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;  // [0, 1)
}

inline double uniform_in(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

inline double exponential(std::mt19937_64& g, double mean) {
  return -mean * std::log1p(-uniform01(g));
}

// Box-Muller without the cached second value.
inline double gaussian(std::mt19937_64& g) {
  const double u1 = uniform01(g);
  const double u2 = uniform01(g);
  const double r = std::sqrt(-2.0 * std::log1p(-u1));
  return r * std::cos(6.283185307179586476925286766559 * u2);
}

// Deterministic per-stream seeding: one substream per (seed, id) pair.
inline std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<unsigned>(seed & 0xffffffffu),
                    static_cast<unsigned>(seed >> 32),
                    static_cast<unsigned>(stream & 0xffffffffu),
                    static_cast<unsigned>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace mec
