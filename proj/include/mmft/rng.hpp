#pragma once

#include <cstdint>
#include <numeric>
#include <string_view>
#include <vector>

namespace mmft {

// 64-bit FNV-1a. Used for parameter-stream derivation and blob checksums.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

// SplitMix64. Small, fast, and fully portable: identical streams on every
// platform, which keeps voxel sampling and weight init bit-reproducible.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0, bound). Modulo bias is negligible for the small
  // bounds used here (point counts, voxel occupancies).
  size_t index(size_t bound) { return bound ? static_cast<size_t>(next_u64() % bound) : 0; }

 private:
  uint64_t state_;
};

// Derives an independent stream from (seed, tag). Adding a new consumer never
// perturbs existing streams.
inline SplitMix64 named_stream(uint64_t seed, std::string_view tag) {
  SplitMix64 mix(seed ^ fnv1a64(tag));
  mix.next_u64();
  return mix;
}

inline SplitMix64 named_stream(uint64_t seed, std::string_view tag, uint64_t salt) {
  SplitMix64 mix(seed ^ fnv1a64(tag) ^ (salt * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull));
  mix.next_u64();
  return mix;
}

// First k entries of a seeded Fisher-Yates pass over [0, n): a uniform sample
// without replacement, in selection order.
inline std::vector<size_t> sample_without_replacement(size_t n, size_t k, SplitMix64& rng) {
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  if (k > n) k = n;
  for (size_t i = 0; i < k; ++i) {
    size_t j = i + rng.index(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace mmft
