#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace firmscape::rng {

// Philox4x32-10 counter-based generator. Every output block is a pure
// function of (key, counter), so substreams keyed by (seed, year, entity,
// purpose) reproduce identically regardless of call order or thread
// schedule. The algorithm name is pinned in scenario configs so runs stay
// portable.
struct Philox4x32 {
  static constexpr std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                                      std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
             std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
    }
    return ctr;
  }
};

// Distinguishes the independent draw streams a single entity consumes within
// one simulated year. Values must stay below 256.
enum class Purpose : std::uint32_t {
  Growth = 1,
  Closure = 2,
  Spinoff = 3,
  SpinoffSize = 4,
  Mode = 5,
  TieBreak = 6,
  ShuffleDemography = 7,
  ShuffleRelocation = 8,
  Assign = 9,
  Synthetic = 10,
  General = 11,
};

// One independent stream of uniform bits plus the derived distributions the
// simulator needs. Distributions are implemented here rather than taken from
// <random> so that outputs do not depend on the standard library build.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint32_t domain, std::uint64_t stream_id)
      : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
        base_{0u, domain, std::uint32_t(stream_id), std::uint32_t(stream_id >> 32)} {}

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, n). Lemire multiply-shift with rejection.
  std::uint64_t bounded(std::uint64_t n) {
    std::uint64_t x = next_u64();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        x = next_u64();
        m = static_cast<unsigned __int128>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller. Consumes two uniforms per value.
  double normal01() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));  // log(1-u1), u1 < 1
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal01(); }

  double lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

 private:
  void refill() {
    auto ctr = base_;
    ctr[0] = block_++;
    buf_ = Philox4x32::block(ctr, key_);
    pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> base_;
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
};

// Substream for (seed, year, entity, purpose). Year and purpose pack into one
// counter word; the entity id fills the remaining 64 counter bits, so streams
// never collide for distinct keys.
inline Stream substream(std::uint64_t seed, int year, std::uint64_t entity_id, Purpose purpose) {
  const std::uint32_t domain =
      (std::uint32_t(year) << 8) | (std::uint32_t(purpose) & 0xFFu);
  return Stream(seed, domain, entity_id);
}

// Seeded Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& values, Stream& stream) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(stream.bounded(i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace firmscape::rng
