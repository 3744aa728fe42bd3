#pragma once

#include <cstdint>
#include <random>

#include "graspforge/common.hpp"

namespace graspforge {

/// Seeded generator used everywhere randomness is needed.
///
/// Engine: 64-bit Mersenne Twister (std::mt19937_64, fully specified by the
/// C++ standard). Conversions are done here rather than through
/// std::*_distribution, whose algorithms are implementation-defined:
///   uniform()  = (next() >> 11) * 2^-53          in [0, 1)
///   index(n)   = rejection-sampled next() mod n
///   normal()   = Box-Muller on two uniform() draws
/// so the same seed produces the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n);
  double normal();
  Vec3 unit_vector();
  Quat rotation();  // uniform over SO(3)

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derive an independent stream seed (splitmix64 of seed ^ stream mix).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace graspforge
