#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace lpdiss {

/// Deterministic 64-bit mix generator (splitmix64). Portable: integer
/// arithmetic plus IEEE doubles formed from the top 53 bits.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1): top 53 bits / 2^53.
  double next_double() {
    return double(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; second deviate cached.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // shift into (0,1) so the log is finite
    const double u1 = (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace lpdiss
