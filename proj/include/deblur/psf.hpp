#pragma once

#include "deblur/image.hpp"

#include <cstdint>
#include <optional>
#include <utility>

namespace deblur {

/// Square, odd-sized, nonnegative blur kernel normalized to unit sum.
/// The center tap sits at ((k-1)/2, (k-1)/2).
class Psf {
 public:
  /// Validates shape and sign, then rescales to unit sum.
  static Psf from_weights(Grid weights);
  static Psf delta(Index size = 1);

  Index size() const { return weights_.rows(); }
  Index center() const { return (size() - 1) / 2; }
  double operator()(Index i, Index j) const { return weights_(i, j); }
  const Grid& weights() const { return weights_; }

 private:
  explicit Psf(Grid w) : weights_(std::move(w)) {}
  Grid weights_;
};

/// Anisotropic Gaussian with covariance [[s1^2, rho^2], [rho^2, s2^2]];
/// axis 1 runs along rows (index i), axis 2 along columns (index j).
Psf gaussian_psf(Index size, double sigma1, double sigma2, double rho);

/// sigma = 0.3 * ((kernel_size - 1) * 0.5 - 1) + 0.8
double gaussian_sigma_for_kernel(Index kernel_size);

/// Random-walk camera-shake kernel; intensity is proportional to dwell time.
/// The walk starts at the center, so a single step gives the delta kernel.
Psf motion_psf(Index size, int trajectory_steps, std::uint64_t seed);

bool is_doubly_symmetric(const Psf& psf, double tol = 1e-12);

/// Column and row kernels (each summing to 1) with col * row^T == psf,
/// or nullopt when the kernel is not rank one within `tol`.
std::optional<std::pair<Vector, Vector>> separable_factors(const Psf& psf, double tol = 1e-10);

}  // namespace deblur
