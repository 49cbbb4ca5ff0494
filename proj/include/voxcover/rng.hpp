#ifndef VOXCOVER_RNG_HPP
#define VOXCOVER_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace voxcover {

// Derives an independent stream seed from (base, stream) via splitmix64.
// Restart r of a fit seeded with s uses derive_seed(s, r).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic random source. Wraps std::mt19937_64 but applies its own
// variate transforms, because std::uniform_real_distribution and
// std::normal_distribution are not bit-stable across standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1): 53 random mantissa bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform index in [0, n). Rejection-free modulo is fine here: n is always
  // tiny (cluster counts, voxel counts) relative to 2^64, so bias is < 2^-40.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(engine_() % static_cast<std::uint64_t>(n));
  }

  // Standard normal via Box-Muller. No caching of the second variate, so the
  // stream consumed per call is fixed (two engine draws).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
  std::mt19937_64 engine_;
};

} // namespace voxcover

#endif
