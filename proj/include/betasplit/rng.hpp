#pragma once

#include <cmath>
#include <cstdint>

namespace betasplit {

// Counter-based random stream: output i of stream (seed, stream) is
// mix64(key(seed, stream) + i * GOLDEN), i.e. the SplitMix64 output function
// applied to an affine counter.  Two properties matter here:
//   * a stream is a pure function of (seed, stream index, counter), so any
//     replicate can be re-run in isolation and parallel runs are reproducible;
//   * substreams are derived by re-keying, never by splitting the sequence,
//     so replicate k always sees the same numbers regardless of worker count.
inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(derive_key(seed, stream)) {}

  std::uint64_t u64() { return mix64(key_ + ++counter_ * kGolden); }

  // New stream keyed off this one; independent of how much this one was used.
  Rng substream(std::uint64_t index) const {
    Rng r(0, 0);
    r.key_ = mix64(key_ ^ mix64((index + 1) * kGolden + 0x8BB84B93962EACC9ull));
    r.counter_ = 0;
    return r;
  }

  // Uniform on the open interval (0,1): 52 random bits centered in each cell,
  // so log() of it is always finite and exponential() is strictly positive.
  double uniform01() {
    return (static_cast<double>(u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  double exponential(double rate) { return -std::log(uniform01()) / rate; }

  // Uniform integer in [0, n), n >= 1.  Multiply-shift; the selection bias is
  // below n * 2^-64, irrelevant at the scales this library supports.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(u64()) * n) >> 64);
  }

  bool coin() { return (u64() >> 63) != 0; }

 private:
  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed + kGolden) ^
                 mix64(stream * 0xD1B54A32D192ED03ull + 1));
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace betasplit
