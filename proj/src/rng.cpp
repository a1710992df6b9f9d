#include "isocal/rng.hpp"

#include <cmath>

#include "isocal/mathutil.hpp"

namespace isocal {

namespace {
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace

double SplitMix64::normal() { return normal_quantile(uniform01()); }

double SplitMix64::exponential(double rate) {
  return -std::log(uniform01()) / rate;
}

SplitMix64 substream(std::uint64_t seed, std::uint64_t row) {
  return SplitMix64(mix64(mix64(seed) ^ (0x9E3779B97F4A7C15ULL * (row + 1))));
}

}  // namespace isocal
