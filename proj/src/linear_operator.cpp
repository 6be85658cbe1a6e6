#include "deblur/linear_operator.hpp"

#include "deblur/convolution.hpp"
#include "deblur/noise.hpp"

#include <memory>
#include <stdexcept>

namespace deblur {

LinearOperator::LinearOperator(Index rows, Index cols, Map forward, Map adjoint)
    : rows_(rows), cols_(cols), forward_(std::move(forward)), adjoint_(std::move(adjoint)) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("LinearOperator: dimensions must be >= 1");
}

LinearOperator LinearOperator::from_dense(DenseOperator op) {
  auto shared = std::make_shared<const DenseOperator>(std::move(op));
  return LinearOperator(
      shared->rows, shared->cols, [shared](const Vector& x) -> Vector { return shared->matrix * x; },
      [shared](const Vector& y) -> Vector { return shared->matrix.transpose() * y; });
}

LinearOperator LinearOperator::from_separable(SeparableBlur blur) {
  auto shared = std::make_shared<const SeparableBlur>(std::move(blur));
  const Index m = shared->rows();
  const Index n = shared->cols();
  return LinearOperator(
      m, n, [shared, m, n](const Vector& x) { return vectorize(deblur::apply(*shared, unvectorize(x, m, n))); },
      [shared, m, n](const Vector& y) { return vectorize(deblur::apply_adjoint(*shared, unvectorize(y, m, n))); });
}

LinearOperator LinearOperator::from_convolution(const Psf& psf, Index rows, Index cols, BoundaryCondition bc) {
  if (psf.size() > std::min(rows, cols)) throw std::invalid_argument("from_convolution: kernel larger than image");
  return LinearOperator(
      rows, cols,
      [psf, rows, cols, bc](const Vector& x) { return vectorize(convolve2d(unvectorize(x, rows, cols), psf, bc)); },
      [psf, rows, cols, bc](const Vector& y) {
        return vectorize(convolve2d_adjoint(unvectorize(y, rows, cols), psf, bc));
      });
}

LinearOperator LinearOperator::from_spectrum(SpectralDiagonalization spectrum) {
  auto shared = std::make_shared<const SpectralDiagonalization>(std::move(spectrum));
  const Index m = shared->rows();
  const Index n = shared->cols();
  return LinearOperator(
      m, n, [shared, m, n](const Vector& x) { return vectorize(shared->apply(unvectorize(x, m, n))); },
      [shared, m, n](const Vector& y) { return vectorize(shared->apply_adjoint(unvectorize(y, m, n))); });
}

double estimate_operator_norm(const LinearOperator& op, int iterations, std::uint64_t seed) {
  Vector v = gaussian_vector(op.size(), 1.0, seed);
  v.normalize();
  double s2 = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector w = op.adjoint(op.apply(v));
    s2 = w.norm();
    if (s2 == 0.0) return 0.0;
    v = w / s2;
  }
  return std::sqrt(s2);
}

}  // namespace deblur
