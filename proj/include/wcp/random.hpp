#ifndef WCP_RANDOM_HPP
#define WCP_RANDOM_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace wcp {

// SplitMix64 output finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// 128-bit key naming an independent random stream.
///
/// Keys are built by absorbing 64-bit words one at a time, so a key is a pure
/// function of the word sequence. Edge keys absorb (depth, child index) pairs
/// along the root-to-vertex path; replicate keys absorb experiment coordinates.
struct StreamKey {
  std::uint64_t hi = 0x6A09E667F3BCC908ULL;
  std::uint64_t lo = 0xBB67AE8584CAA73BULL;

  [[nodiscard]] constexpr StreamKey absorb(std::uint64_t word) const noexcept {
    StreamKey k;
    const std::uint64_t a = mix64(hi ^ (word * 0x9E3779B97F4A7C15ULL));
    const std::uint64_t b = mix64(lo + std::rotl(word, 32) * 0xD1B54A32D192ED03ULL + a);
    k.hi = mix64(a ^ std::rotl(b, 23));
    k.lo = b;
    return k;
  }

  [[nodiscard]] constexpr StreamKey absorb(std::initializer_list<std::uint64_t> words) const noexcept {
    StreamKey k = *this;
    for (auto w : words) k = k.absorb(w);
    return k;
  }

  friend constexpr bool operator==(const StreamKey&, const StreamKey&) = default;
};

constexpr StreamKey make_key(std::uint64_t seed) noexcept { return StreamKey{}.absorb(seed); }

constexpr StreamKey make_key(std::uint64_t seed, std::initializer_list<std::uint64_t> words) noexcept {
  return StreamKey{}.absorb(seed).absorb(words);
}

/// xoshiro256++ generator. Satisfies UniformRandomBitGenerator.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  constexpr explicit Xoshiro256pp(const StreamKey& key) noexcept {
    std::uint64_t sm = key.hi ^ std::rotl(key.lo, 17);
    for (auto& w : s_) {
      sm += 0x9E3779B97F4A7C15ULL;
      w = mix64(sm ^ key.lo);
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    const std::uint64_t result = std::rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = std::rotl(s_[3], 45);
    return result;
  }

 private:
  std::uint64_t s_[4]{};
};

/// Deterministic random stream with the handful of variates the simulators need.
class Stream {
 public:
  explicit Stream(const StreamKey& key) noexcept : gen_(key) {}
  explicit Stream(std::uint64_t seed) noexcept : gen_(make_key(seed)) {}

  std::uint64_t bits() noexcept { return gen_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() noexcept { return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; }

  /// Exp(rate) variate; rate must be positive.
  double exponential(double rate) noexcept { return -std::log(uniform_pos()) / rate; }

  /// Uniform integer in [0, n) by multiply-shift (n > 0).
  std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  Xoshiro256pp& engine() noexcept { return gen_; }

 private:
  Xoshiro256pp gen_;
};

}  // namespace wcp

#endif  // WCP_RANDOM_HPP
