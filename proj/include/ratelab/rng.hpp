#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ratelab {

// Deterministic seed derivation.
//
// Every stochastic task in the library draws from its own std::mt19937_64
// seeded through derive_seed(). Concurrent tasks therefore never share an
// engine, and results are independent of scheduling / worker count.
//
// Scheme: FNV-1a over the label, then each counter is folded in through the
// splitmix64 finalizer. The finalizer is a full-avalanche bijection, so
// distinct (master, label, counters...) tuples map to well-separated seeds.

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  return splitmix64(master ^ fnv1a64(label));
}

inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                           std::uint64_t c0) {
  return splitmix64(derive_seed(master, label) ^ c0);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                           std::uint64_t c0, std::uint64_t c1) {
  return splitmix64(splitmix64(derive_seed(master, label) ^ c0) ^ c1);
}

inline std::mt19937_64 make_engine(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace ratelab
