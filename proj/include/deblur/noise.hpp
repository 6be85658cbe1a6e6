#pragma once

#include "deblur/image.hpp"

#include <cstdint>

namespace deblur {

/// Additive white Gaussian noise, targeted either by per-pixel standard
/// deviation or by the total Frobenius norm of the realization.
struct NoiseSpec {
  enum class Target { std_dev, frobenius };

  Target target = Target::std_dev;
  double value = 0.0;
  std::uint64_t seed = 0;

  static NoiseSpec std_dev(double eta, std::uint64_t seed);
  static NoiseSpec frobenius(double norm, std::uint64_t seed);
};

struct NoisyGrid {
  Grid observed;  // x + e
  Grid noise;     // e
};

NoisyGrid add_noise(const Grid& x, const NoiseSpec& spec);

/// Per-channel noise; channel c draws from seed + c.
struct NoisyImage {
  Image observed;
  Image noise;
};
NoisyImage add_noise(const Image& x, const NoiseSpec& spec);

/// Standard normal draws from a seeded generator.
Vector gaussian_vector(Index length, double std_dev, std::uint64_t seed);

}  // namespace deblur
