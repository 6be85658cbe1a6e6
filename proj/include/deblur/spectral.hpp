#pragma once

#include "deblur/image.hpp"
#include "deblur/operator.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace deblur {

/// A = U * diag(sigma) * V^T with sigma sorted in descending order.
///
/// Dense triples hold U and V explicitly. Kronecker triples keep only the
/// factor SVDs of A_c (m x m) and A_r (n x n); singular vector i is the
/// image U_c(:, a) * U_r(:, b)^T for the factor pair (a, b) = ordering()[i],
/// built on demand.
class SvdTriple {
 public:
  enum class Structure { dense, kronecker };

  /// Singular index i of a Kronecker triple maps to columns of the factors.
  struct FactorPair {
    Index col_factor;  // column of U_c / V_c
    Index row_factor;  // column of U_r / V_r
  };

  static SvdTriple dense(Eigen::MatrixXd u, Vector sigma, Eigen::MatrixXd v, Index rows, Index cols);
  static SvdTriple kronecker(Eigen::MatrixXd u_col, Vector sigma_col, Eigen::MatrixXd v_col, Eigen::MatrixXd u_row,
                             Vector sigma_row, Eigen::MatrixXd v_row);

  Structure structure() const { return structure_; }
  Index size() const { return sigma_.size(); }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  const Vector& singular_values() const { return sigma_; }

  Vector left_vector(Index i) const;
  Vector right_vector(Index i) const;

  /// U^T b in sorted order.
  Vector coefficients(const Vector& b) const;
  /// V^T x in sorted order.
  Vector right_coefficients(const Vector& x) const;
  /// sum_i w_i v_i.
  Vector synthesize(const Vector& w) const;
  /// sum_i w_i u_i.
  Vector synthesize_left(const Vector& w) const;
  /// U * diag(sigma) * V^T * x.
  Vector apply(const Vector& x) const;

  const Eigen::MatrixXd& u() const;  // dense only
  const Eigen::MatrixXd& v() const;  // dense only
  std::span<const FactorPair> ordering() const { return ordering_; }
  const Eigen::MatrixXd& u_col() const { return u_col_; }
  const Eigen::MatrixXd& v_col() const { return v_col_; }
  const Eigen::MatrixXd& u_row() const { return u_row_; }
  const Eigen::MatrixXd& v_row() const { return v_row_; }
  const Vector& sigma_col() const { return sigma_col_; }
  const Vector& sigma_row() const { return sigma_row_; }

 private:
  void check_length(const Vector& x, const char* what) const;
  Vector gather(const Grid& g) const;
  Grid scatter(const Vector& w) const;

  Structure structure_ = Structure::dense;
  Index rows_ = 0;
  Index cols_ = 0;
  Vector sigma_;
  Eigen::MatrixXd u_;
  Eigen::MatrixXd v_;
  Eigen::MatrixXd u_col_, v_col_, u_row_, v_row_;
  Vector sigma_col_, sigma_row_;
  std::vector<FactorPair> ordering_;
};

SvdTriple svd_dense(const DenseOperator& op);
/// Two small SVDs; product singular values are stably sorted, ties broken by
/// (row factor, column factor) index.
SvdTriple svd_separable(const SeparableBlur& blur);

double condition_number(const SvdTriple& svd);

/// c = U^T b.
Vector spectral_coefficients(const SvdTriple& svd, const Vector& b);

/// Per-index diagnostics (sigma_i, |u_i^T b|, |u_i^T b| / sigma_i), sorted by
/// descending sigma. A zero sigma gives an infinite ratio.
struct PicardSeries {
  Vector sigma;
  Vector coefficient;
  Vector abs_coefficient;
  Vector ratio;

  Index size() const { return sigma.size(); }
};

PicardSeries picard_series(const SvdTriple& svd, const Vector& b);

/// Noise level read off the flat tail of the spectral coefficients.
struct NoiseEstimate {
  double eta = 0.0;           // median |c_i| over the tail
  double tail_fraction = 0.3;
  /// Count of leading coefficients above the plateau: the first index where
  /// the moving average of |c_i| drops to `kPlateauFactor * eta`.
  Index plateau_index = 0;
};

inline constexpr double kDefaultTailFraction = 0.3;
inline constexpr Index kPicardWindow = 15;
inline constexpr double kPlateauFactor = 2.0;

NoiseEstimate noise_plateau(const PicardSeries& series, double tail_fraction = kDefaultTailFraction);

struct PicardVerdict {
  bool satisfied = false;
  double nonincreasing_fraction = 0.0;
  Index checked_steps = 0;
};

/// Discrete Picard check: the moving average of |c_i| / sigma_i over the
/// indices before the plateau must be non-increasing on at least
/// `required_fraction` of its steps.
PicardVerdict picard_check(const PicardSeries& series, const NoiseEstimate& noise, Index window = kPicardWindow,
                           double required_fraction = 0.8);

/// Centered moving average; the window is truncated at both ends.
Vector moving_average(const Vector& x, Index window);

/// Columns: i,sigma,abs_coeff,ratio (i is 1-based).
void write_csv(std::ostream& out, const PicardSeries& series);

}  // namespace deblur
