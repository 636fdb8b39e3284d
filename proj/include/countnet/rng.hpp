#ifndef COUNTNET_RNG_HPP
#define COUNTNET_RNG_HPP

// Deterministic random numbers. All draws go through hand-rolled transforms
// (53-bit uniforms, inverse-cdf normals) instead of the std distributions,
// whose output is implementation defined; the same seed must reproduce the
// same stream on any platform.

#include <cstdint>
#include <random>

namespace countnet {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(mix(seed)) {}

  // Independent substream: mixes (seed, stream_id) so callers can hand each
  // replication or agent its own generator.
  Rng(std::uint64_t seed, std::uint64_t stream_id)
      : gen_(mix(mix(seed) + 0x9E3779B97F4A7C15ULL * (stream_id + 1))) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on the open interval (0, 1); never returns an endpoint, so it is
  // safe to feed through norm_quantile.
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  // Standard normal by inversion.
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

private:
  static std::uint64_t mix(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 gen_;
};

}  // namespace countnet

#endif
