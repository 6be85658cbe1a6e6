#pragma once

#include "deblur/image.hpp"
#include "deblur/psf.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

namespace testing {

using deblur::BoundaryCondition;
using deblur::Grid;
using deblur::Index;
using deblur::Psf;
using deblur::Vector;

inline Grid random_grid(Index m, Index n, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Grid g(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) g(i, j) = u(rng);
  return g;
}

inline Vector random_vector(Index n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

inline Psf random_psf(Index k, std::mt19937_64& rng) { return Psf::from_weights(random_grid(k, k, rng, 0.05, 1.0)); }

/// Odd-length nonnegative kernel with unit sum.
inline Vector random_kernel(Index k, std::mt19937_64& rng) {
  Vector v = random_vector(k, rng, 0.05, 1.0);
  return v / v.sum();
}

/// Independent extension rule for the oracles: a single fold for the
/// reflexive case, which is all a kernel no larger than the image needs.
inline Index extend(Index p, Index size, BoundaryCondition bc) {
  if (p >= 0 && p < size) return p;
  switch (bc) {
    case BoundaryCondition::zero: return -1;
    case BoundaryCondition::periodic: return ((p % size) + size) % size;
    case BoundaryCondition::reflexive: return p < 0 ? -1 - p : 2 * size - 1 - p;
  }
  return -1;
}

/// out(i0, j0) = sum_{a,b} P(a, b) X(i0 + c - a, j0 + c - b)
inline Grid convolution_oracle(const Grid& x, const Grid& p, BoundaryCondition bc) {
  const Index m = x.rows();
  const Index n = x.cols();
  const Index c = (p.rows() - 1) / 2;
  Grid out = Grid::Zero(m, n);
  for (Index i0 = 0; i0 < m; ++i0)
    for (Index j0 = 0; j0 < n; ++j0)
      for (Index a = 0; a < p.rows(); ++a)
        for (Index b = 0; b < p.cols(); ++b) {
          const Index i = extend(i0 + c - a, m, bc);
          const Index j = extend(j0 + c - b, n, bc);
          if (i >= 0 && j >= 0) out(i0, j0) += p(a, b) * x(i, j);
        }
  return out;
}

/// Dense 1-D blur matrix built from the oracle extension rule.
inline Eigen::MatrixXd blur_matrix_oracle(const Vector& kernel, Index size, BoundaryCondition bc) {
  const Index c = (kernel.size() - 1) / 2;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
  for (Index i = 0; i < size; ++i)
    for (Index t = 0; t < kernel.size(); ++t) {
      const Index j = extend(i + c - t, size, bc);
      if (j >= 0) a(i, j) += kernel(t);
    }
  return a;
}

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Smooth test image with a few soft blobs on a ramp.
inline Grid smooth_image(Index m, Index n) {
  Grid g(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) {
      const double y = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
      const double x = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
      g(i, j) = 0.2 + 0.3 * x + 0.4 * std::exp(-((x - 0.4) * (x - 0.4) + (y - 0.6) * (y - 0.6)) / 0.03) +
                0.2 * std::exp(-((x - 0.75) * (x - 0.75) + (y - 0.3) * (y - 0.3)) / 0.01);
    }
  return g;
}

/// Piecewise-constant scene of discs and rectangles.
inline Grid blocky_image(Index m, Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double dm = static_cast<double>(m);
  const double dn = static_cast<double>(n);
  Grid x = Grid::Constant(m, n, 0.2);
  for (int r = 0; r < 10; ++r) {
    const double ci = dm * u(rng), cj = dn * u(rng), rad = (4.0 + 10.0 * u(rng)) * dm / 64.0, v = u(rng);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < m; ++i)
        if ((double(i) - ci) * (double(i) - ci) + (double(j) - cj) * (double(j) - cj) < rad * rad) x(i, j) = v;
  }
  for (int r = 0; r < 4; ++r) {
    const double i0 = dm * u(rng), j0 = dn * u(rng), h = (6.0 + 18.0 * u(rng)) * dm / 64.0,
                 w = (6.0 + 18.0 * u(rng)) * dn / 64.0, v = u(rng);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < m; ++i)
        if (double(i) >= i0 && double(i) < i0 + h && double(j) >= j0 && double(j) < j0 + w) x(i, j) = v;
  }
  return x;
}

inline double relative_error(const Vector& a, const Vector& b) { return (a - b).norm() / b.norm(); }

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("deblur_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
