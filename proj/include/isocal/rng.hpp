#pragma once

#include <cstdint>

namespace isocal {

// SplitMix64 bit generator. Chosen over the std distributions because those
// are implementation-defined; this generator plus inverse-CDF sampling gives
// bit-identical draws on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on the open interval (0,1): (k + 0.5) / 2^52 over the top 52
  // bits, so downstream logs and quantiles never see 0 or 1.
  double uniform01() { return (static_cast<double>(next() >> 12) + 0.5) * 0x1.0p-52; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Inverse-CDF standard normal.
  double normal();

  // Exponential with the given rate parameter (mean 1/rate).
  double exponential(double rate);

 private:
  std::uint64_t state_;
};

// Substream for one row of one seeded run. Each row draws from its own
// stream, so generation order (and any parallel schedule) cannot change the
// result: state = mix(mix(seed) xor golden * (row + 1)).
SplitMix64 substream(std::uint64_t seed, std::uint64_t row);

}  // namespace isocal
