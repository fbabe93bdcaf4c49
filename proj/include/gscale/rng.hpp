#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace gscale {

// The standard distributions are implementation-defined, so everything that
// feeds reproducible results draws through these helpers instead.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-style key: the same (seed, a, b) always yields the same stream seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline std::uint64_t uniform_index(std::mt19937_64& gen, std::uint64_t n) {
  // Rejection sampling avoids modulo bias.
  const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
  std::uint64_t x;
  do {
    x = gen();
  } while (x >= limit);
  return x % n;
}

// Box-Muller producing pairs; one instance per stream.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : gen_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform01(gen_);
    } while (u1 <= 0.0);
    const double u2 = uniform01(gen_);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gscale
