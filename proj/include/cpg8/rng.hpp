#pragma once

#include <cstdint>

namespace cpg8 {

// SplitMix64: deterministic across platforms, cheap to seed, and trivially
// splittable into independent substreams (unlike std::uniform_real_distribution,
// whose output is implementation-defined).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0,1) with 53-bit resolution
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Independent substream k of this generator's seed. Streams do not overlap in
  // practice: each is a SplitMix64 walk starting from a mixed (seed, k) pair.
  SplitMix64 substream(std::uint64_t k) const {
    SplitMix64 mixer(state_ ^ (0xd1b54a32d192ed03ULL * (k + 1)));
    mixer.next_u64();
    return SplitMix64(mixer.next_u64());
  }

 private:
  std::uint64_t state_;
};

}  // namespace cpg8
