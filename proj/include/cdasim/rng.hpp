#pragma once

#include <cstdint>
#include <random>

namespace cdasim {

using Rng = std::mt19937_64;

// Independent generator streams of one run. Each stream is seeded from
// (seed, stream id), so adding agents or draws in one stream leaves the
// others untouched.
enum class Stream : std::uint32_t { Fundamental = 1, Switching = 2, Trading = 3, Expectation = 4 };

inline Rng make_stream(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x9e3779b9u};
  return Rng(seq);
}

// Uniform in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace cdasim
