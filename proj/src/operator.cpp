#include "deblur/operator.hpp"

#include "deblur/convolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>

namespace deblur {

namespace {

// The FFTW planner is not reentrant; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void check_kernel(const Vector& kernel, Index size, const char* which) {
  if (kernel.size() < 1 || kernel.size() % 2 == 0)
    throw std::invalid_argument(std::string(which) + " kernel length must be odd");
  if (kernel.size() > size)
    throw std::invalid_argument(std::string(which) + " kernel of length " + std::to_string(kernel.size()) +
                                " exceeds dimension " + std::to_string(size));
  if (std::abs(kernel.sum() - 1.0) > 1e-10) throw std::invalid_argument(std::string(which) + " kernel must sum to 1");
}

}  // namespace

Grid blur_matrix_1d(const Vector& kernel, Index size, BoundaryCondition bc) {
  const Index h = (kernel.size() - 1) / 2;
  Grid a = Grid::Zero(size, size);
  for (Index i = 0; i < size; ++i) {
    for (Index s = -h; s <= h; ++s) {
      const Index src = boundary_index(i - s, size, bc);
      if (src >= 0) a(i, src) += kernel(h + s);
    }
  }
  return a;
}

SeparableBlur build_separable(const Vector& row_kernel, const Vector& col_kernel, Index rows, Index cols,
                              BoundaryCondition bc) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("build_separable: image dimensions must be >= 1");
  check_kernel(row_kernel, cols, "row");
  check_kernel(col_kernel, rows, "column");
  SeparableBlur blur;
  blur.row_blur = blur_matrix_1d(row_kernel, cols, bc);
  blur.col_blur = blur_matrix_1d(col_kernel, rows, bc);
  blur.bc = bc;
  blur.row_kernel = row_kernel;
  blur.col_kernel = col_kernel;
  return blur;
}

SeparableBlur build_separable(const Psf& psf, Index rows, Index cols, BoundaryCondition bc) {
  auto factors = separable_factors(psf);
  if (!factors) throw std::invalid_argument("psf is not separable (rank > 1)");
  return build_separable(factors->second, factors->first, rows, cols, bc);
}

Grid apply(const SeparableBlur& blur, const Grid& x) {
  if (x.rows() != blur.rows() || x.cols() != blur.cols())
    throw std::invalid_argument("apply: image is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                                ", operator expects " + std::to_string(blur.rows()) + "x" +
                                std::to_string(blur.cols()));
  return blur.col_blur * x * blur.row_blur.transpose();
}

Grid apply_adjoint(const SeparableBlur& blur, const Grid& x) {
  if (x.rows() != blur.rows() || x.cols() != blur.cols()) throw std::invalid_argument("apply_adjoint: shape mismatch");
  return blur.col_blur.transpose() * x * blur.row_blur;
}

DenseOperator assemble_dense(const SeparableBlur& blur) {
  const Index m = blur.rows();
  const Index n = blur.cols();
  const Index big_n = m * n;
  if (big_n > kDenseCap)
    throw std::invalid_argument("assemble_dense: N = " + std::to_string(big_n) + " exceeds the dense cap of " +
                                std::to_string(kDenseCap) + "; use the separable or transform path");
  Eigen::MatrixXd a(big_n, big_n);
#pragma omp parallel for schedule(static)
  for (Index l = 0; l < n; ++l) {
    for (Index j = 0; j < n; ++j) {
      a.block(j * m, l * m, m, m) = blur.row_blur(j, l) * blur.col_blur;
    }
  }
  return {std::move(a), m, n, DenseOperator::Provenance::separable};
}

DenseOperator assemble_dense(const Psf& psf, Index rows, Index cols, BoundaryCondition bc) {
  const Index big_n = rows * cols;
  if (big_n > kDenseCap)
    throw std::invalid_argument("assemble_dense: N = " + std::to_string(big_n) + " exceeds the dense cap of " +
                                std::to_string(kDenseCap) + "; use the separable or transform path");
  if (psf.size() > std::min(rows, cols)) throw std::invalid_argument("assemble_dense: kernel larger than image");
  Eigen::MatrixXd a(big_n, big_n);
#pragma omp parallel for schedule(static)
  for (Index q = 0; q < big_n; ++q) {
    Grid e = Grid::Zero(rows, cols);
    e(q % rows, q / rows) = 1.0;
    a.col(q) = vectorize(serial::convolve2d(e, psf, bc));
  }
  return {std::move(a), rows, cols, DenseOperator::Provenance::convolution};
}

DenseOperator make_dense(Eigen::MatrixXd matrix, Index rows, Index cols) {
  if (matrix.rows() != matrix.cols() || matrix.rows() != rows * cols)
    throw std::invalid_argument("make_dense: matrix must be (rows*cols) x (rows*cols)");
  if (matrix.rows() > kDenseCap)
    throw std::invalid_argument("make_dense: N exceeds the dense cap of " + std::to_string(kDenseCap));
  return {std::move(matrix), rows, cols, DenseOperator::Provenance::explicit_matrix};
}

void write_csv(std::ostream& out, const DenseOperator& op) {
  out << op.size() << '\n' << std::setprecision(17);
  for (Index i = 0; i < op.size(); ++i) {
    for (Index j = 0; j < op.size(); ++j) out << (j ? "," : "") << op.matrix(i, j);
    out << '\n';
  }
}

Eigen::MatrixXcd fft2(const Eigen::MatrixXcd& x, bool inverse) {
  const Index m = x.rows();
  const Index n = x.cols();
  Eigen::MatrixXcd in = x;
  Eigen::MatrixXcd out(m, n);
  auto* pin = reinterpret_cast<fftw_complex*>(in.data());
  auto* pout = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    // Column-major m x n is row-major n x m; the 2-D DFT does not care.
    plan = fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(m), pin, pout,
                            inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  if (inverse) out /= static_cast<double>(m * n);
  return out;
}

namespace {

Grid r2r2(const Grid& x, fftw_r2r_kind kind) {
  const Index m = x.rows();
  const Index n = x.cols();
  Grid in = x;
  Grid out(m, n);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_r2r_2d(static_cast<int>(n), static_cast<int>(m), in.data(), out.data(), kind, kind,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

// Per-frequency scale turning FFTW's REDFT10 into the orthonormal DCT-II.
Vector dct_weights(Index len) {
  Vector w = Vector::Constant(len, std::sqrt(1.0 / (2.0 * static_cast<double>(len))));
  w(0) = std::sqrt(1.0 / (4.0 * static_cast<double>(len)));
  return w;
}

}  // namespace

Grid dct2(const Grid& x) {
  const Grid y = r2r2(x, FFTW_REDFT10);
  const Vector wr = dct_weights(x.rows());
  const Vector wc = dct_weights(x.cols());
  return (wr * wc.transpose()).cwiseProduct(y);
}

Grid idct2(const Grid& c) {
  // REDFT01 computes X_0 + 2 sum_k X_k cos(...); pre-scale to the orthonormal inverse.
  Vector wr = dct_weights(c.rows());
  Vector wc = dct_weights(c.cols());
  wr(0) *= 2.0;
  wc(0) *= 2.0;
  const Grid scaled = (wr * wc.transpose()).cwiseProduct(c);
  return r2r2(scaled, FFTW_REDFT01);
}

Vector SpectralDiagonalization::singular_values() const {
  Vector s = Eigen::Map<const Vector>(eigenvalues_.cwiseAbs().eval().data(), eigenvalues_.size());
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

Grid SpectralDiagonalization::apply(const Grid& x) const {
  if (x.rows() != rows_ || x.cols() != cols_) throw std::invalid_argument("spectral apply: shape mismatch");
  if (basis_ == Basis::fourier) {
    const Eigen::MatrixXcd xf = fft2(x.cast<std::complex<double>>());
    return fft2(eigenvalues_.cwiseProduct(xf), true).real();
  }
  return idct2(eigenvalues_.real().cwiseProduct(dct2(x)));
}

Grid SpectralDiagonalization::apply_adjoint(const Grid& x) const {
  if (basis_ == Basis::cosine) return apply(x);
  if (x.rows() != rows_ || x.cols() != cols_) throw std::invalid_argument("spectral apply: shape mismatch");
  const Eigen::MatrixXcd xf = fft2(x.cast<std::complex<double>>());
  return fft2(eigenvalues_.conjugate().cwiseProduct(xf), true).real();
}

SpectralDiagonalization bccb_spectrum(const Psf& psf, Index rows, Index cols) {
  const Index k = psf.size();
  if (k > std::min(rows, cols)) throw std::invalid_argument("bccb_spectrum: kernel larger than image");
  const Index c = psf.center();
  // Place tap (c + s, c + t) at (s mod rows, t mod cols).
  Eigen::MatrixXcd shifted = Eigen::MatrixXcd::Zero(rows, cols);
  for (Index t = 0; t < k; ++t) {
    for (Index s = 0; s < k; ++s) {
      const Index i = boundary_index(s - c, rows, BoundaryCondition::periodic);
      const Index j = boundary_index(t - c, cols, BoundaryCondition::periodic);
      shifted(i, j) += psf(s, t);
    }
  }
  SpectralDiagonalization d;
  d.basis_ = SpectralDiagonalization::Basis::fourier;
  d.rows_ = rows;
  d.cols_ = cols;
  d.eigenvalues_ = fft2(shifted);
  return d;
}

SpectralDiagonalization dct_spectrum(const Psf& psf, Index rows, Index cols) {
  const Index k = psf.size();
  if (k > std::min(rows, cols)) throw std::invalid_argument("dct_spectrum: kernel larger than image");
  if (!is_doubly_symmetric(psf)) throw std::invalid_argument("dct_spectrum: doubly symmetric PSF required");
  const Index h = psf.center();
  // Fold the kernel onto its lower-right quadrant: tap (h + r, h + s) plus its
  // neighbours one step further out, matching the half-sample reflection.
  Grid folded = Grid::Zero(rows, cols);
  for (Index s = 0; s <= h; ++s) {
    for (Index r = 0; r <= h; ++r) {
      double acc = 0.0;
      for (Index a = h + r; a <= std::min(h + r + 1, k - 1); ++a) {
        for (Index b = h + s; b <= std::min(h + s + 1, k - 1); ++b) acc += psf(a, b);
      }
      folded(r, s) = acc;
    }
  }
  Grid impulse = Grid::Zero(rows, cols);
  impulse(0, 0) = 1.0;
  const Grid num = dct2(folded);
  const Grid den = dct2(impulse);
  SpectralDiagonalization d;
  d.basis_ = SpectralDiagonalization::Basis::cosine;
  d.rows_ = rows;
  d.cols_ = cols;
  d.eigenvalues_ = num.cwiseQuotient(den).cast<std::complex<double>>();
  return d;
}

void write_csv(std::ostream& out, const SpectralDiagonalization& spectrum) {
  const bool fourier = spectrum.basis() == SpectralDiagonalization::Basis::fourier;
  out << (fourier ? "i,j,real,imag,modulus\n" : "i,j,value\n") << std::setprecision(17);
  const auto& ev = spectrum.eigenvalues();
  for (Index i = 0; i < ev.rows(); ++i) {
    for (Index j = 0; j < ev.cols(); ++j) {
      out << i << ',' << j << ',' << ev(i, j).real();
      if (fourier) out << ',' << ev(i, j).imag() << ',' << std::abs(ev(i, j));
      out << '\n';
    }
  }
}

double condition_number(std::span<const double> singular_values) {
  if (singular_values.empty()) throw std::invalid_argument("condition_number: no singular values");
  double hi = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  for (double s : singular_values) {
    hi = std::max(hi, std::abs(s));
    lo = std::min(lo, std::abs(s));
  }
  if (hi == 0.0) throw std::invalid_argument("condition_number: all singular values are zero");
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

double condition_number(const SpectralDiagonalization& spectrum) {
  const Vector s = spectrum.singular_values();
  return condition_number(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())));
}

}  // namespace deblur
