#include "deblur/noise.hpp"

#include <random>
#include <stdexcept>

namespace deblur {

NoiseSpec NoiseSpec::std_dev(double eta, std::uint64_t seed) {
  if (!(eta >= 0.0)) throw std::invalid_argument("noise standard deviation must be >= 0");
  return {Target::std_dev, eta, seed};
}

NoiseSpec NoiseSpec::frobenius(double norm, std::uint64_t seed) {
  if (!(norm >= 0.0)) throw std::invalid_argument("noise Frobenius norm must be >= 0");
  return {Target::frobenius, norm, seed};
}

Vector gaussian_vector(Index length, double std_dev, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(length);
  for (Index i = 0; i < length; ++i) v(i) = std_dev * normal(rng);
  return v;
}

NoisyGrid add_noise(const Grid& x, const NoiseSpec& spec) {
  if (!(spec.value >= 0.0)) throw std::invalid_argument("noise target must be >= 0");
  Grid e = Grid::Zero(x.rows(), x.cols());
  if (spec.value > 0.0) {
    const Vector draw = gaussian_vector(x.size(), 1.0, spec.seed);
    e = unvectorize(draw, x.rows(), x.cols());
    if (spec.target == NoiseSpec::Target::std_dev) {
      e *= spec.value;
    } else {
      e *= spec.value / e.norm();
    }
  }
  return {x + e, std::move(e)};
}

NoisyImage add_noise(const Image& x, const NoiseSpec& spec) {
  std::vector<Grid> observed;
  std::vector<Grid> noise;
  for (int c = 0; c < x.channel_count(); ++c) {
    NoiseSpec per = spec;
    per.seed = spec.seed + static_cast<std::uint64_t>(c);
    auto r = add_noise(x.channel(c), per);
    observed.push_back(std::move(r.observed));
    noise.push_back(std::move(r.noise));
  }
  return {Image(std::move(observed)), Image(std::move(noise))};
}

}  // namespace deblur
