#pragma once

#include <cstdint>

namespace groupblame::epistemic {

// Counter-based generator: output i of stream s under seed k is a pure
// function of (k, s, i), so streams can be handed to threads without
// changing results.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  std::uint64_t next() { return at(counter_++); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    // Rejection keeps the result unbiased.
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % bound;
  }

  CounterRng split(std::uint64_t stream) const { return CounterRng(seed_, mix(stream_ + 1) ^ stream); }

  std::uint64_t at(std::uint64_t counter) const {
    return mix(seed_ ^ mix(stream_ * 0x9e3779b97f4a7c15ULL + mix(counter)));
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace groupblame::epistemic
