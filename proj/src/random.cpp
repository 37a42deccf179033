#include "chroma_boltz/random.hpp"

#include <cmath>
#include <string>

#include "chroma_boltz/errors.hpp"

namespace chroma_boltz {

std::uint64_t RandomStream::below(std::uint64_t n) {
  if (n == 0) throw InvalidParameter("empty range");
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

bool bern(RandomStream& rng, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("Bernoulli parameter " + std::to_string(p) + " outside [0,1]");
  return rng.uniform() < p;
}

// Sequential inversion: walk the CDF until it passes u. The loop stops if the
// mass underflows, which only happens for u within rounding of 1.
std::uint64_t geom(RandomStream& rng, double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw InvalidParameter("geometric parameter " + std::to_string(lambda) + " outside [0,1)");
  }
  const double u = rng.uniform();
  double mass = 1.0 - lambda;
  double cdf = mass;
  std::uint64_t k = 0;
  while (u >= cdf) {
    mass *= lambda;
    if (mass <= 0.0 || cdf + mass == cdf) break;
    cdf += mass;
    ++k;
  }
  return k;
}

std::uint64_t pois(RandomStream& rng, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidParameter("Poisson parameter " + std::to_string(lambda) + " must be >= 0");
  }
  if (lambda == 0.0) return 0;
  // Sum of independent halves keeps e^-lambda representable.
  if (lambda > 500.0) return pois(rng, lambda / 2.0) + pois(rng, lambda / 2.0);
  const double u = rng.uniform();
  double mass = std::exp(-lambda);
  double cdf = mass;
  std::uint64_t k = 0;
  while (u >= cdf) {
    ++k;
    mass *= lambda / static_cast<double>(k);
    if (cdf + mass == cdf && static_cast<double>(k) > lambda) break;
    cdf += mass;
  }
  return k;
}

std::uint64_t pois_pos(RandomStream& rng, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidParameter("positive Poisson parameter " + std::to_string(lambda) + " must be > 0");
  }
  if (lambda > 40.0) {
    // P(0) < 5e-18: truncating the ordinary law is exact to double precision.
    for (;;) {
      if (std::uint64_t k = pois(rng, lambda)) return k;
    }
  }
  const double u = rng.uniform();
  double mass = lambda / std::expm1(lambda);
  double cdf = mass;
  std::uint64_t k = 1;
  while (u >= cdf) {
    ++k;
    mass *= lambda / static_cast<double>(k);
    if (cdf + mass == cdf && static_cast<double>(k) > lambda) break;
    cdf += mass;
  }
  return k;
}

std::uint64_t logarithmic(RandomStream& rng, double a) {
  if (!(a > 0.0 && a < 1.0)) throw InvalidParameter("logarithmic parameter " + std::to_string(a) + " outside (0,1)");
  const double u = rng.uniform();
  double mass = a / -std::log1p(-a);
  double cdf = mass;
  std::uint64_t l = 1;
  while (u >= cdf) {
    mass *= a * static_cast<double>(l) / static_cast<double>(l + 1);
    ++l;
    if (mass <= 0.0 || cdf + mass == cdf) break;
    cdf += mass;
  }
  return l;
}

}  // namespace chroma_boltz
