#pragma once

#include <cstdint>
#include <random>

namespace demandirl {

/// Deterministic random source.
///
/// Wraps mt19937_64 but generates all variates through explicit inverse /
/// rejection constructions instead of the standard-library distribution
/// adaptors, whose output is implementation-defined.  Two Rng instances
/// built from the same seed therefore produce identical streams on every
/// platform, which is what makes seeded CLI runs byte-reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform draw in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  /// Uniform draw in (0, 1], safe as an argument of log().
  double uniform_pos() { return 1.0 - uniform01(); }

  /// Standard normal via Box-Muller (no cached second value, so the
  /// stream position is a pure function of the number of calls).
  double normal();

  /// Standard exponential.
  double exponential();

  std::uint64_t raw() { return eng_(); }

  /// Derives the seed of an independent substream.  Used to give every
  /// simulated cycle / experiment repeat / Monte Carlo path its own
  /// stream so that results do not depend on scheduling or worker count.
  static std::uint64_t substream(std::uint64_t master, std::uint64_t index);

 private:
  std::mt19937_64 eng_;
};

}  // namespace demandirl
