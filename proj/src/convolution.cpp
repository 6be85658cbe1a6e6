#include "deblur/convolution.hpp"

#include <stdexcept>
#include <string>

namespace deblur {

namespace {

void check_kernel_fits(Index k, Index m, Index n) {
  if (k > std::min(m, n))
    throw std::invalid_argument("kernel of size " + std::to_string(k) + " is larger than the " +
                                std::to_string(m) + "x" + std::to_string(n) + " image");
}

void check_taps(const Grid& taps) {
  if (taps.rows() != taps.cols() || taps.rows() % 2 == 0)
    throw std::invalid_argument("convolution taps must be square with odd size");
}

}  // namespace

Grid convolve2d_taps(const Grid& x, const Grid& taps, BoundaryCondition bc) {
  check_taps(taps);
  const Index k = taps.rows();
  const Index m = x.rows();
  const Index n = x.cols();
  check_kernel_fits(k, m, n);
  const Index h = (k - 1) / 2;
  const Grid xp = pad(x, bc, h);
  Grid out(m, n);
#pragma omp parallel for schedule(static)
  for (Index j0 = 0; j0 < n; ++j0) {
    for (Index i0 = 0; i0 < m; ++i0) {
      double acc = 0.0;
      for (Index t = 0; t < k; ++t) {
        const Index pj = j0 + 2 * h - t;
        for (Index s = 0; s < k; ++s) acc += xp(i0 + 2 * h - s, pj) * taps(s, t);
      }
      out(i0, j0) = acc;
    }
  }
  return out;
}

Grid convolve2d(const Grid& x, const Psf& psf, BoundaryCondition bc) {
  return convolve2d_taps(x, psf.weights(), bc);
}

Image convolve2d(const Image& x, const Psf& psf, BoundaryCondition bc) {
  std::vector<Grid> out(static_cast<std::size_t>(x.channel_count()));
#pragma omp parallel for schedule(static)
  for (int c = 0; c < x.channel_count(); ++c) out[static_cast<std::size_t>(c)] = convolve2d(x.channel(c), psf, bc);
  return Image(std::move(out));
}

Grid convolve2d_adjoint(const Grid& r, const Psf& psf, BoundaryCondition bc) {
  const Index k = psf.size();
  const Index m = r.rows();
  const Index n = r.cols();
  check_kernel_fits(k, m, n);
  const Index h = (k - 1) / 2;
  const Index mp = m + 2 * h;
  const Index np = n + 2 * h;
  // Correlate r with the taps onto the padded canvas.
  Grid zp(mp, np);
#pragma omp parallel for schedule(static)
  for (Index v = 0; v < np; ++v) {
    for (Index u = 0; u < mp; ++u) {
      double acc = 0.0;
      for (Index t = 0; t < k; ++t) {
        const Index j0 = v - 2 * h + t;
        if (j0 < 0 || j0 >= n) continue;
        for (Index s = 0; s < k; ++s) {
          const Index i0 = u - 2 * h + s;
          if (i0 < 0 || i0 >= m) continue;
          acc += r(i0, j0) * psf(s, t);
        }
      }
      zp(u, v) = acc;
    }
  }
  // Fold the halo back onto the pixels it was read from.
  Grid out = zp.block(h, h, m, n);
  if (h == 0) return out;
  for (Index v = 0; v < np; ++v) {
    const Index sj = boundary_index(v - h, n, bc);
    for (Index u = 0; u < mp; ++u) {
      const bool interior = u >= h && u < h + m && v >= h && v < h + n;
      if (interior) continue;
      const Index si = boundary_index(u - h, m, bc);
      if (si >= 0 && sj >= 0) out(si, sj) += zp(u, v);
    }
  }
  return out;
}

Grid psf_gradient(const Grid& x, const Grid& r, Index kernel_size, BoundaryCondition bc) {
  const Index k = kernel_size;
  if (k % 2 == 0 || k < 1) throw std::invalid_argument("psf_gradient: kernel size must be odd");
  if (x.rows() != r.rows() || x.cols() != r.cols()) throw std::invalid_argument("psf_gradient: shape mismatch");
  check_kernel_fits(k, x.rows(), x.cols());
  const Index h = (k - 1) / 2;
  const Index m = x.rows();
  const Index n = x.cols();
  const Grid xp = pad(x, bc, h);
  Grid g(k, k);
#pragma omp parallel for collapse(2) schedule(static)
  for (Index t = 0; t < k; ++t) {
    for (Index s = 0; s < k; ++s) {
      g(s, t) = (r.array() * xp.block(2 * h - s, 2 * h - t, m, n).array()).sum();
    }
  }
  return g;
}

namespace serial {

Grid convolve2d(const Grid& x, const Psf& psf, BoundaryCondition bc) {
  const Index k = psf.size();
  const Index m = x.rows();
  const Index n = x.cols();
  check_kernel_fits(k, m, n);
  const Index h = psf.center();
  Grid out = Grid::Zero(m, n);
  for (Index i0 = 0; i0 < m; ++i0) {
    for (Index j0 = 0; j0 < n; ++j0) {
      double acc = 0.0;
      for (Index i = i0 - h; i <= i0 + h; ++i) {
        for (Index j = j0 - h; j <= j0 + h; ++j) {
          const Index si = boundary_index(i, m, bc);
          const Index sj = boundary_index(j, n, bc);
          if (si < 0 || sj < 0) continue;
          acc += x(si, sj) * psf(h + i0 - i, h + j0 - j);
        }
      }
      out(i0, j0) = acc;
    }
  }
  return out;
}

Grid convolve2d_adjoint(const Grid& r, const Psf& psf, BoundaryCondition bc) {
  const Index k = psf.size();
  const Index m = r.rows();
  const Index n = r.cols();
  check_kernel_fits(k, m, n);
  const Index h = psf.center();
  Grid out = Grid::Zero(m, n);
  for (Index i0 = 0; i0 < m; ++i0) {
    for (Index j0 = 0; j0 < n; ++j0) {
      for (Index i = i0 - h; i <= i0 + h; ++i) {
        for (Index j = j0 - h; j <= j0 + h; ++j) {
          const Index si = boundary_index(i, m, bc);
          const Index sj = boundary_index(j, n, bc);
          if (si < 0 || sj < 0) continue;
          out(si, sj) += r(i0, j0) * psf(h + i0 - i, h + j0 - j);
        }
      }
    }
  }
  return out;
}

Grid psf_gradient(const Grid& x, const Grid& r, Index kernel_size, BoundaryCondition bc) {
  const Index k = kernel_size;
  const Index m = x.rows();
  const Index n = x.cols();
  check_kernel_fits(k, m, n);
  const Index h = (k - 1) / 2;
  Grid g = Grid::Zero(k, k);
  for (Index i0 = 0; i0 < m; ++i0) {
    for (Index j0 = 0; j0 < n; ++j0) {
      for (Index i = i0 - h; i <= i0 + h; ++i) {
        for (Index j = j0 - h; j <= j0 + h; ++j) {
          const Index si = boundary_index(i, m, bc);
          const Index sj = boundary_index(j, n, bc);
          if (si < 0 || sj < 0) continue;
          g(h + i0 - i, h + j0 - j) += r(i0, j0) * x(si, sj);
        }
      }
    }
  }
  return g;
}

}  // namespace serial

}  // namespace deblur
