#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace subriem {

struct RNGSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

/// Philox4x32-10 block function.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
    auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += w0;
    key[1] += w1;
  }
  return ctr;
}

/// Counter-based stream: key = seed, counter = (block index, stream id).
class PhiloxStream {
 public:
  explicit PhiloxStream(RNGSpec spec)
      : key_{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32)},
        stream_(spec.stream_id) {}

  std::array<std::uint32_t, 4> next_block() {
    std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                     static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    ++block_;
    return philox4x32(ctr, key_);
  }

  /// Standard normal via Box-Muller, two per block.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    auto b = next_block();
    double u1 = 1.0 - to_unit(b[0], b[1]);  // (0, 1]
    double u2 = to_unit(b[2], b[3]);
    double r = std::sqrt(-2.0 * std::log(u1));
    double th = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
  }

  /// 53-bit uniform in [0, 1).
  static double to_unit(std::uint32_t a, std::uint32_t b) {
    std::uint64_t m = (static_cast<std::uint64_t>(a >> 5) << 26) | (b >> 6);
    return static_cast<double>(m) * 0x1.0p-53;
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  bool have_spare_ = false;
  double spare_ = 0;
};

}  // namespace subriem
