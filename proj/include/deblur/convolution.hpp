#pragma once

#include "deblur/image.hpp"
#include "deblur/psf.hpp"

namespace deblur {

// Same-size 2-D convolution
//
//   G(i0, j0) = sum_{i,j} X(i, j) * P(c + i0 - i, c + j0 - j),   c = (k-1)/2,
//
// with X extended past its border according to `bc`. A point source at (p, q)
// therefore produces G(p + a, q + b) = P(c + a, c + b).
//
// The functions at namespace scope are the OpenMP kernels; `serial::` holds
// straightforward reference loops used by the tests and the benchmark.

Grid convolve2d(const Grid& x, const Psf& psf, BoundaryCondition bc);
Image convolve2d(const Image& x, const Psf& psf, BoundaryCondition bc);

/// Adjoint of `convolve2d` for the same psf and boundary condition, so that
/// <convolve2d(x), r> == <x, convolve2d_adjoint(r)>.
Grid convolve2d_adjoint(const Grid& r, const Psf& psf, BoundaryCondition bc);

/// Gradient of <r, convolve2d(x, P)> with respect to the k x k taps of P.
Grid psf_gradient(const Grid& x, const Grid& r, Index kernel_size, BoundaryCondition bc);

/// Convolution with arbitrary (unnormalized, possibly signed) odd square taps.
Grid convolve2d_taps(const Grid& x, const Grid& taps, BoundaryCondition bc);

namespace serial {

Grid convolve2d(const Grid& x, const Psf& psf, BoundaryCondition bc);
Grid convolve2d_adjoint(const Grid& r, const Psf& psf, BoundaryCondition bc);
Grid psf_gradient(const Grid& x, const Grid& r, Index kernel_size, BoundaryCondition bc);

}  // namespace serial

}  // namespace deblur
