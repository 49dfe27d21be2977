#include "threebox/rng.hpp"

#include <cmath>

namespace threebox {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng Rng::for_stream(std::uint64_t seed, StreamDomain domain, std::uint64_t index) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ static_cast<std::uint64_t>(domain));
  s = splitmix64(s ^ index);
  return Rng(s);
}

double Rng::exponential() {
  // 1 - u lies in (0, 1], so the log is finite.
  return -std::log(1.0 - uniform());
}

std::string seed_path(std::uint64_t seed, std::uint64_t round_id) {
  return std::to_string(seed) + ":" + std::to_string(round_id);
}

}  // namespace threebox
