#include "siglab/rng.hpp"

#include <cmath>
#include <numbers>

namespace siglab {

double RngStream::next_normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // u1 in (0, 1] so the log is finite.
  double u1 = 1.0 - next_double();
  double u2 = next_double();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  RngStream s(seed, salt ^ 0xd1b54a32d192ed03ull);
  return s.next_u64();
}

}  // namespace siglab
