#pragma once

#include <array>
#include <cstdint>

namespace fountain {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Each
/// (key, counter) pair maps to four independent 32-bit words, so sample i of
/// an ensemble can be drawn without touching samples 0..i-1.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;

  explicit constexpr Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  constexpr Counter operator()(Counter ctr) const {
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }

  /// Four uniforms in the open interval (0, 1) for stream `index`, block `block`.
  std::array<double, 4> uniforms(std::uint64_t index, std::uint32_t block = 0) const {
    const Counter out = (*this)({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), block, 0});
    std::array<double, 4> u{};
    for (int i = 0; i < 4; ++i) u[i] = (static_cast<double>(out[i]) + 0.5) * 0x1p-32;
    return u;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57;
  static constexpr std::uint32_t kW0 = 0x9E3779B9;
  static constexpr std::uint32_t kW1 = 0xBB67AE85;

  std::array<std::uint32_t, 2> key_;
};

}  // namespace fountain
