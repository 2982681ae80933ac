#include "demandirl/rng.hpp"

#include <cmath>
#include <numbers>

namespace demandirl {

double Rng::normal() {
  // Box-Muller, cosine branch only.  Wastes half the pair but keeps the
  // engine position independent of call history.
  double u1 = uniform_pos();
  double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential() { return -std::log(uniform_pos()); }

std::uint64_t Rng::substream(std::uint64_t master, std::uint64_t index) {
  // splitmix64 applied to master ^ f(index); the golden-ratio increment
  // decorrelates consecutive indices.
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace demandirl
