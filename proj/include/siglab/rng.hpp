#pragma once

#include <cstdint>

namespace siglab {

// splitmix64 stream with Box-Muller normals. The algorithm is spelled out
// here (not delegated to <random> distributions) so that every sequence is
// identical across standard libraries and platforms for a given seed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : state_(mix(seed ^ mix(stream_id + 0x9e3779b97f4a7c15ull))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Unbiased index in [0, n) via 128-bit multiply-shift.
  std::uint64_t next_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double next_normal();

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

// Deterministic sub-seed derivation, used to give every consumer
// (init, data, corruption-per-step, ...) an independent stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace siglab
