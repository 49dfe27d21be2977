#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace threebox {

// Stream domains keep per-round and per-pair generators disjoint for one seed.
enum class StreamDomain : std::uint64_t {
  kRound = 0x726f756e64ULL,
  kVerification = 0x7665726966ULL,
  kSearch = 0x7365617263ULL,
  kStrategy = 0x7374726174ULL,
  kSchedule = 0x7363686564ULL,
};

std::uint64_t splitmix64(std::uint64_t x);

// Seeded generator. All sampling goes through uniform(), which is defined
// bit-exactly from the engine output so records replay on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng for_stream(std::uint64_t seed, StreamDomain domain, std::uint64_t index);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Always consumes exactly one draw, whatever p is.
  bool bernoulli(double p) { return uniform() < p; }

  // Uniform index in [0, n). One draw.
  std::size_t index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  // Exp(1) variate, used for Dirichlet draws.
  double exponential();

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

std::string seed_path(std::uint64_t seed, std::uint64_t round_id);

}  // namespace threebox
