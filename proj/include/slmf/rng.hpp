// Portable seeded random numbers. The standard library distributions are not
// specified bit-for-bit across implementations, so uniform and normal draws
// are computed here from a xoshiro256** stream.
#pragma once

#include <cstdint>

namespace slmf {

class Rng {
 public:
  // Named substreams: the same seed gives independent sequences per purpose.
  static constexpr std::uint64_t kStreamPositions = 1;
  static constexpr std::uint64_t kStreamCongestion = 2;
  static constexpr std::uint64_t kStreamEquilibrium = 3;
  static constexpr std::uint64_t kStreamTesting = 4;

  // State words are four successive splitmix64 outputs started at
  // seed ^ (stream * 0x9e3779b97f4a7c15).
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  // [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // [0, n)
  int below(int n);
  // Box-Muller, one value per call (the second value is discarded so the
  // draw count per call is fixed).
  double normal(double mean, double stddev);
  double lognormal(double mu, double sigma);

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace slmf
