#pragma once

#include <cstdint>
#include <random>

namespace chroma_boltz {

/// Seeded 64-bit stream. Reals are built from the top 53 bits of each
/// draw, so a seed reproduces the same values on every platform.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform in {0, ..., n - 1}, n >= 1.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

// splitmix64 mixing of (seed, index); used to give every sample of a batch an
// independent stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Distribution kernel. Parameters outside the stated ranges throw InvalidParameter.

// P(1) = p, p in [0, 1].
bool bern(RandomStream& rng, double p);
// P(k) = lambda^k (1 - lambda), lambda in [0, 1).
std::uint64_t geom(RandomStream& rng, double lambda);
// P(k) = e^-lambda lambda^k / k!, lambda >= 0.
std::uint64_t pois(RandomStream& rng, double lambda);
// P(k) = lambda^k / ((e^lambda - 1) k!), k >= 1, lambda > 0.
std::uint64_t pois_pos(RandomStream& rng, double lambda);
// P(l) = a^l / (l * -ln(1 - a)), l >= 1, a in (0, 1).
std::uint64_t logarithmic(RandomStream& rng, double a);

}  // namespace chroma_boltz
