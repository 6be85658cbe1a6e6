#pragma once

#include "deblur/operator.hpp"
#include "deblur/psf.hpp"

#include <cstdint>
#include <functional>

namespace deblur {

/// Type-erased forward blur on column-stacked m x n images together with its
/// adjoint. Copies share the underlying operator data.
class LinearOperator {
 public:
  using Map = std::function<Vector(const Vector&)>;

  LinearOperator(Index rows, Index cols, Map forward, Map adjoint);

  static LinearOperator from_dense(DenseOperator op);
  static LinearOperator from_separable(SeparableBlur blur);
  static LinearOperator from_convolution(const Psf& psf, Index rows, Index cols, BoundaryCondition bc);
  static LinearOperator from_spectrum(SpectralDiagonalization spectrum);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index size() const { return rows_ * cols_; }

  Vector apply(const Vector& x) const { return forward_(x); }
  Vector adjoint(const Vector& y) const { return adjoint_(y); }

 private:
  Index rows_;
  Index cols_;
  Map forward_;
  Map adjoint_;
};

/// Largest singular value by power iteration on A^T A.
double estimate_operator_norm(const LinearOperator& op, int iterations = 100, std::uint64_t seed = 1);

}  // namespace deblur
