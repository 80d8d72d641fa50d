#pragma once

#include <cstdint>
#include <initializer_list>

namespace vcselrc {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based seed derivation: every (parent, counter...) path gives an
/// independent, reproducible child seed. derive_seed(s, {a, b}) ==
/// derive_seed(derive_seed(s, {a}), {b}).
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = parent;
  for (auto c : path) s = splitmix64(s ^ splitmix64(c + 1));
  return s;
}

/// Stream tags used with derive_seed.
enum class SeedStream : std::uint64_t {
  uniform_sequence = 1,
  binary_sequence = 2,
  heterogeneity = 3,
  dynamics_noise = 4,
  detection_noise = 5,
};

constexpr std::uint64_t tag(SeedStream s) {
  return static_cast<std::uint64_t>(s);
}

} // namespace vcselrc
