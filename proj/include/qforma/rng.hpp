#pragma once

#include <cstdint>

namespace qforma {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Bijective on uint64.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-mode generator built on the SplitMix64 finalizer.
//
//   key(seed, stream) = mix64(mix64(seed + GAMMA) ^ mix64(stream * GAMMA + 1))
//   draw i            = mix64(key + i * GAMMA)
//
// Stateless apart from the counter, so substream (seed, i) always yields the
// same values no matter how many other streams were consumed. Monte Carlo
// callers give every sample index its own stream; results are then identical
// for serial and parallel execution.
class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix64(mix64(seed + kGamma) ^ mix64(stream * kGamma + 1))),
        counter_(0) {}

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGamma); }

  // Uniform on [0,1), 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0,1]; safe as a log() argument.
  double uniform01_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (cosine branch only; two uniforms per
  // draw, keeping the stream layout independent of call history).
  double normal();

  // Gamma(shape, scale), Marsaglia-Tsang squeeze-and-reject.
  double gamma(double shape, double scale);

  // Chi-square with dof degrees of freedom = Gamma(dof/2, 2).
  double chi_square(double dof) { return gamma(0.5 * dof, 2.0); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

// Stream-id namespaces so distinct subsystems sharing one user seed never
// collide: each reserves a 2^32-wide block and offsets it by its own index
// (sample index, draw index, row index).
inline constexpr std::uint64_t kStreamQuadform = 0x0ULL << 32;
inline constexpr std::uint64_t kStreamPercentile = 0x1ULL << 32;
inline constexpr std::uint64_t kStreamObservations = 0x2ULL << 32;
inline constexpr std::uint64_t kStreamSparseGen = 0x3ULL << 32;

}  // namespace qforma
