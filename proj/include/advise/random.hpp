#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace advise {

// Deterministic random source. Uniform draws are built directly from the
// engine bits so sequences do not depend on the standard library's
// distribution implementations.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed = 0) : engine_(seed) {}

  RandomStream(std::uint64_t master_seed, std::string_view stream_name)
      : engine_(seed_for(master_seed, stream_name)) {}

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Mixes the master seed with a stream name into an independent seed.
  static std::uint64_t seed_for(std::uint64_t master_seed, std::string_view stream_name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (const char c : stream_name) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return splitmix64(master_seed ^ splitmix64(h));
  }

private:
  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace advise
