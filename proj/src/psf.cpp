#include "deblur/psf.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace deblur {

Psf Psf::from_weights(Grid weights) {
  const Index k = weights.rows();
  if (k < 1 || weights.cols() != k) throw std::invalid_argument("psf must be a nonempty square kernel");
  if (k % 2 == 0) throw std::invalid_argument("psf size must be odd, got " + std::to_string(k));
  if (!weights.allFinite()) throw std::invalid_argument("psf contains non-finite entries");
  if ((weights.array() < 0.0).any()) throw std::invalid_argument("psf entries must be nonnegative");
  const double total = weights.sum();
  if (!(total > 0.0)) throw std::invalid_argument("psf entries sum to zero");
  weights /= total;
  return Psf(std::move(weights));
}

Psf Psf::delta(Index size) {
  Grid w = Grid::Zero(size, size);
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("psf size must be odd and >= 1");
  w((size - 1) / 2, (size - 1) / 2) = 1.0;
  return Psf(std::move(w));
}

Psf gaussian_psf(Index size, double sigma1, double sigma2, double rho) {
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("gaussian_psf: size must be odd and >= 1");
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) throw std::invalid_argument("gaussian_psf: widths must be positive");
  const double a = sigma1 * sigma1;
  const double b = rho * rho;
  const double d = sigma2 * sigma2;
  const double det = a * d - b * b;
  if (!(det > 0.0))
    throw std::invalid_argument("gaussian_psf: covariance is not positive definite (need rho^2 < sigma1*sigma2)");
  // Inverse of [[a, b], [b, d]].
  const double ia = d / det;
  const double ib = -b / det;
  const double id = a / det;
  const double c = static_cast<double>((size - 1) / 2);
  Grid w(size, size);
  for (Index j = 0; j < size; ++j) {
    for (Index i = 0; i < size; ++i) {
      const double di = static_cast<double>(i) - c;
      const double dj = static_cast<double>(j) - c;
      w(i, j) = std::exp(-0.5 * (ia * di * di + 2.0 * ib * di * dj + id * dj * dj));
    }
  }
  return Psf::from_weights(std::move(w));
}

double gaussian_sigma_for_kernel(Index kernel_size) {
  return 0.3 * ((static_cast<double>(kernel_size) - 1.0) * 0.5 - 1.0) + 0.8;
}

Psf motion_psf(Index size, int trajectory_steps, std::uint64_t seed) {
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("motion_psf: size must be odd and >= 1");
  if (trajectory_steps < 1) throw std::invalid_argument("motion_psf: trajectory_steps must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle0(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> turn(0.0, 0.6);
  std::uniform_real_distribution<double> stride(0.4, 1.0);

  const double lo = 0.0;
  const double hi = static_cast<double>(size - 1);
  const double c = static_cast<double>((size - 1) / 2);
  double y = c;
  double x = c;
  double heading = angle0(rng);

  Grid w = Grid::Zero(size, size);
  auto splat = [&](double py, double px) {
    const auto i0 = static_cast<Index>(std::floor(py));
    const auto j0 = static_cast<Index>(std::floor(px));
    const double fy = py - static_cast<double>(i0);
    const double fx = px - static_cast<double>(j0);
    for (int di = 0; di < 2; ++di) {
      for (int dj = 0; dj < 2; ++dj) {
        const Index i = i0 + di;
        const Index j = j0 + dj;
        const double wt = (di ? fy : 1.0 - fy) * (dj ? fx : 1.0 - fx);
        if (wt > 0.0 && i >= 0 && i < size && j >= 0 && j < size) w(i, j) += wt;
      }
    }
  };

  for (int s = 0; s < trajectory_steps; ++s) {
    splat(y, x);
    heading += turn(rng);
    const double len = stride(rng);
    y += len * std::sin(heading);
    x += len * std::cos(heading);
    // Bounce off the window edges.
    if (y < lo) { y = 2 * lo - y; heading = -heading; }
    if (y > hi) { y = 2 * hi - y; heading = -heading; }
    if (x < lo) { x = 2 * lo - x; heading = std::numbers::pi - heading; }
    if (x > hi) { x = 2 * hi - x; heading = std::numbers::pi - heading; }
  }
  return Psf::from_weights(std::move(w));
}

bool is_doubly_symmetric(const Psf& psf, double tol) {
  const Grid& w = psf.weights();
  const Grid flip_rows = w.colwise().reverse();
  const Grid flip_cols = w.rowwise().reverse();
  return (w - flip_rows).cwiseAbs().maxCoeff() <= tol && (w - flip_cols).cwiseAbs().maxCoeff() <= tol;
}

std::optional<std::pair<Vector, Vector>> separable_factors(const Psf& psf, double tol) {
  const Grid& w = psf.weights();
  if (w.size() == 1) return std::pair<Vector, Vector>{Vector::Ones(1), Vector::Ones(1)};
  Eigen::JacobiSVD<Grid> svd(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector s = svd.singularValues();
  if (s(1) > tol * s(0)) return std::nullopt;
  Vector col = svd.matrixU().col(0);
  Vector row = svd.matrixV().col(0);
  col /= col.sum();
  row /= row.sum();
  // Rounding can leave tiny negatives where the kernel is exactly zero.
  col = col.cwiseMax(0.0);
  row = row.cwiseMax(0.0);
  col /= col.sum();
  row /= row.sum();
  return std::pair<Vector, Vector>{std::move(col), std::move(row)};
}

}  // namespace deblur
