#ifndef EHC_RNG_HPP
#define EHC_RNG_HPP

#include <array>
#include <cstdint>

namespace ehc {

// Philox4x32-10 counter-based generator (Salmon et al., Random123).
//
// Stream layout, version 1:
//   key     = {seed low 32 bits, seed high 32 bits}
//   counter = {block low, block high, substream low, substream high}
// Sub-stream i (one per Monte Carlo trial) fixes counter words 2..3 to i and
// walks words 0..1, so every trial owns 2^64 blocks of four 32-bit words and
// draws are independent of scheduling order.
class Philox4x32 {
public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr int kVersion = 1;
  static constexpr const char* kName = "philox4x32-10";

  Philox4x32(std::uint64_t seed, std::uint64_t substream = 0) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        substream_(substream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    if (lane_ == 2) {
      refill();
    }
    const auto lo = static_cast<std::uint64_t>(buffer_[2 * lane_]);
    const auto hi = static_cast<std::uint64_t>(buffer_[2 * lane_ + 1]);
    ++lane_;
    return (hi << 32) | lo;
  }

  // Uniform on (0, 1], 53-bit resolution. Never returns 0, so log(u) is finite.
  double uniform_open_closed() noexcept {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }

  std::uint64_t substream() const noexcept { return substream_; }

  // Raw bijection, exposed for known-answer tests.
  static Block bijection(Block counter, Key key) noexcept {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * counter[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * counter[2];
      counter = {static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ key[0],
                 static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ key[1],
                 static_cast<std::uint32_t>(p0)};
    }
    return counter;
  }

private:
  void refill() noexcept {
    const Block ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                    static_cast<std::uint32_t>(substream_),
                    static_cast<std::uint32_t>(substream_ >> 32)};
    buffer_ = bijection(ctr, key_);
    ++block_;
    lane_ = 0;
  }

  Key key_;
  std::uint64_t substream_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int lane_ = 2;
};

}  // namespace ehc

#endif  // EHC_RNG_HPP
