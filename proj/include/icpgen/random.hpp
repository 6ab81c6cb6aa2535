#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace icpgen {

// Every stochastic step in the library draws from this engine type, seeded
// explicitly, so runs are reproducible from (seed, config, data).
using Rng = std::mt19937_64;

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Independent stream for a (seed, purpose, counter) triple; used where a side
// computation must not perturb the main training stream.
inline Rng derived_rng(std::uint64_t seed, std::uint64_t purpose, std::uint64_t counter = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(counter),
                    static_cast<std::uint32_t>(counter >> 32)};
  return Rng(seq);
}

}  // namespace icpgen
