#pragma once

#include "deblur/image.hpp"
#include "deblur/psf.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <span>

namespace deblur {

/// Largest N = m * n for which a dense N x N operator (and its SVD) is built.
inline constexpr Index kDenseCap = 4096;

/// Blur whose operator is the Kronecker product A_r (x) A_c:
/// B = A_c * X * A_r^T for an m x n image X.
struct SeparableBlur {
  Grid row_blur;  // n x n, acts along each row
  Grid col_blur;  // m x m, acts down each column
  BoundaryCondition bc = BoundaryCondition::reflexive;
  Vector row_kernel;
  Vector col_kernel;

  Index rows() const { return col_blur.rows(); }
  Index cols() const { return row_blur.rows(); }
};

/// Matrix of the 1-D convolution y_i = sum_s x_{i-s} kernel[h+s] on `size`
/// samples, with out-of-range reads resolved by `bc`.
Grid blur_matrix_1d(const Vector& kernel, Index size, BoundaryCondition bc);

SeparableBlur build_separable(const Vector& row_kernel, const Vector& col_kernel, Index rows, Index cols,
                              BoundaryCondition bc);
/// Splits a rank-one psf into its 1-D factors; throws if it is not separable.
SeparableBlur build_separable(const Psf& psf, Index rows, Index cols, BoundaryCondition bc);

Grid apply(const SeparableBlur& blur, const Grid& x);
Grid apply_adjoint(const SeparableBlur& blur, const Grid& x);

struct DenseOperator {
  enum class Provenance { separable, convolution, explicit_matrix };

  Eigen::MatrixXd matrix;  // N x N acting on column-stacked images
  Index rows = 0;          // image shape
  Index cols = 0;
  Provenance provenance = Provenance::explicit_matrix;

  Index size() const { return matrix.rows(); }
  Vector apply(const Vector& x) const { return matrix * x; }
};

/// A_r (x) A_c in column-stacking order.
DenseOperator assemble_dense(const SeparableBlur& blur);
/// Slow path for any psf and boundary condition: one convolution per column.
DenseOperator assemble_dense(const Psf& psf, Index rows, Index cols, BoundaryCondition bc);
DenseOperator make_dense(Eigen::MatrixXd matrix, Index rows, Index cols);

void write_csv(std::ostream& out, const DenseOperator& op);

/// Eigen-decomposition of a blur by a fast 2-D transform.
class SpectralDiagonalization {
 public:
  enum class Basis { fourier, cosine };

  Basis basis() const { return basis_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  /// Complex eigenvalue grid (fourier); for cosine the imaginary part is 0.
  const Eigen::MatrixXcd& eigenvalues() const { return eigenvalues_; }
  /// Real eigenvalues; only meaningful for the cosine basis.
  Grid real_eigenvalues() const { return eigenvalues_.real(); }
  /// Eigenvalue moduli, which are the singular values of the operator.
  Vector singular_values() const;

  /// Transform, multiply by the eigenvalues, transform back.
  Grid apply(const Grid& x) const;
  /// Same with conjugated eigenvalues.
  Grid apply_adjoint(const Grid& x) const;

 private:
  friend SpectralDiagonalization bccb_spectrum(const Psf&, Index, Index);
  friend SpectralDiagonalization dct_spectrum(const Psf&, Index, Index);

  Basis basis_ = Basis::fourier;
  Index rows_ = 0;
  Index cols_ = 0;
  Eigen::MatrixXcd eigenvalues_;
};

/// Periodic boundary: eigenvalues are the 2-D DFT of the psf with its center
/// circularly shifted to the origin.
SpectralDiagonalization bccb_spectrum(const Psf& psf, Index rows, Index cols);
/// Reflexive boundary with a doubly symmetric psf: eigenvalues from the 2-D
/// DCT-II of the folded psf divided by the DCT of the unit impulse.
SpectralDiagonalization dct_spectrum(const Psf& psf, Index rows, Index cols);

void write_csv(std::ostream& out, const SpectralDiagonalization& spectrum);

/// 2-D transforms backed by FFTW. fft2 is unnormalized forward and scaled by
/// 1/(m*n) on the inverse; dct2/idct2 are the orthonormal DCT-II and its inverse.
Eigen::MatrixXcd fft2(const Eigen::MatrixXcd& x, bool inverse = false);
Grid dct2(const Grid& x);
Grid idct2(const Grid& x);

/// max |s| / min |s|; +infinity when the smallest value is exactly zero.
double condition_number(std::span<const double> singular_values);
double condition_number(const SpectralDiagonalization& spectrum);

}  // namespace deblur
