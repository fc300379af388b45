#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace augb {

/// Deterministic 64-bit generator (SplitMix64: one word of state advanced by
/// a fixed odd increment, output = finalizing hash of the state). No
/// platform-dependent library distributions are involved anywhere, so a seed
/// produces the same draw sequence on every platform. Streams for distinct
/// purposes are derived with keyed(), never by sharing one generator.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    return mix64(z);
  }

  /// Uniform on [0,1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Unbiased integer on [0,n), n >= 1. Lemire's multiply-reject method.
  std::uint64_t uniform_int(std::uint64_t n) {
    using u128 = unsigned __int128;
    u128 m = static_cast<u128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      std::uint64_t t = (0 - n) % n;
      while (lo < t) {
        m = static_cast<u128>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Standard normal, Box-Muller cosine branch. Consumes exactly two
  /// uniforms per call regardless of the values drawn.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Independent stream derived from an ordered key tuple, e.g.
  /// (seed, stream tag, epoch, image index). Absorbs each word through the
  /// SplitMix64 finalizer so nearby keys give unrelated streams.
  static Rng keyed(std::initializer_list<std::uint64_t> words) {
    std::uint64_t s = 0x243f6a8885a308d3ull;
    for (std::uint64_t w : words) s = mix64(s ^ mix64(w));
    Rng r;
    r.state_ = s;
    return r;
  }

 private:
  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

/// Stream tags keeping derived generators disjoint under one experiment seed.
namespace rng_stream {
inline constexpr std::uint64_t kAugment = 0xA16;
inline constexpr std::uint64_t kShuffle = 0x5AF;
inline constexpr std::uint64_t kInit = 0x171;
inline constexpr std::uint64_t kDropout = 0xD02;
inline constexpr std::uint64_t kSubset = 0x5B5;
inline constexpr std::uint64_t kTta = 0x77A;
inline constexpr std::uint64_t kBlobs = 0xB10;
inline constexpr std::uint64_t kCrop = 0xC40;
}  // namespace rng_stream

}  // namespace augb
