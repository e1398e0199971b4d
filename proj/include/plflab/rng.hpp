#pragma once

// Seeded pseudo-random numbers with a fully specified algorithm so that runs
// are replayable across implementations:
//   * xoshiro256** (Blackman & Vigna) as the generator,
//   * state seeded by four successive splitmix64 outputs of the seed,
//   * uniform doubles from the top 53 bits,
//   * standard normals from the Marsaglia polar method (second variate cached).

#include <cmath>
#include <cstdint>

namespace plf {

/// splitmix64 step; also used to derive per-replication seeds from a root seed.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of replication `i` under `root`: the i-th splitmix64 output.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t i) {
  std::uint64_t state = root + i * 0x9e3779b97f4a7c15ULL;
  return splitmix64(state);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  /// Standard normal conditioned on |z| <= bound (rejection sampling).
  double truncated_normal(double bound) {
    double z = normal();
    while (std::fabs(z) > bound) z = normal();
    return z;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4]{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace plf
