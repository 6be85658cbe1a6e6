#include "deblur/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace deblur {

SvdTriple SvdTriple::dense(Eigen::MatrixXd u, Vector sigma, Eigen::MatrixXd v, Index rows, Index cols) {
  const Index n = sigma.size();
  if (u.rows() != n || u.cols() != n || v.rows() != n || v.cols() != n || rows * cols != n)
    throw std::invalid_argument("SvdTriple::dense: inconsistent factor sizes");
  SvdTriple t;
  t.structure_ = Structure::dense;
  t.rows_ = rows;
  t.cols_ = cols;
  t.u_ = std::move(u);
  t.v_ = std::move(v);
  t.sigma_ = std::move(sigma);
  return t;
}

SvdTriple SvdTriple::kronecker(Eigen::MatrixXd u_col, Vector sigma_col, Eigen::MatrixXd v_col,
                               Eigen::MatrixXd u_row, Vector sigma_row, Eigen::MatrixXd v_row) {
  SvdTriple t;
  t.structure_ = Structure::kronecker;
  t.rows_ = sigma_col.size();
  t.cols_ = sigma_row.size();
  const Index m = t.rows_;
  const Index n = t.cols_;
  t.ordering_.reserve(static_cast<std::size_t>(m * n));
  for (Index b = 0; b < n; ++b) {
    for (Index a = 0; a < m; ++a) t.ordering_.push_back({a, b});
  }
  // Insertion order is (row factor, column factor) lexicographic, so a stable
  // sort on the product resolves ties by that order.
  std::stable_sort(t.ordering_.begin(), t.ordering_.end(), [&](const FactorPair& x, const FactorPair& y) {
    return sigma_col(x.col_factor) * sigma_row(x.row_factor) > sigma_col(y.col_factor) * sigma_row(y.row_factor);
  });
  t.sigma_.resize(m * n);
  for (Index i = 0; i < m * n; ++i) {
    const auto& p = t.ordering_[static_cast<std::size_t>(i)];
    t.sigma_(i) = sigma_col(p.col_factor) * sigma_row(p.row_factor);
  }
  t.u_col_ = std::move(u_col);
  t.v_col_ = std::move(v_col);
  t.u_row_ = std::move(u_row);
  t.v_row_ = std::move(v_row);
  t.sigma_col_ = std::move(sigma_col);
  t.sigma_row_ = std::move(sigma_row);
  return t;
}

void SvdTriple::check_length(const Vector& x, const char* what) const {
  if (x.size() != size())
    throw std::invalid_argument(std::string(what) + ": vector length " + std::to_string(x.size()) +
                                " does not match N = " + std::to_string(size()));
}

Vector SvdTriple::gather(const Grid& g) const {
  Vector out(size());
  for (Index i = 0; i < size(); ++i) {
    const auto& p = ordering_[static_cast<std::size_t>(i)];
    out(i) = g(p.col_factor, p.row_factor);
  }
  return out;
}

Grid SvdTriple::scatter(const Vector& w) const {
  Grid g(rows_, cols_);
  for (Index i = 0; i < size(); ++i) {
    const auto& p = ordering_[static_cast<std::size_t>(i)];
    g(p.col_factor, p.row_factor) = w(i);
  }
  return g;
}

Vector SvdTriple::left_vector(Index i) const {
  if (i < 0 || i >= size()) throw std::out_of_range("left_vector: index out of range");
  if (structure_ == Structure::dense) return u_.col(i);
  const auto& p = ordering_[static_cast<std::size_t>(i)];
  return vectorize(u_col_.col(p.col_factor) * u_row_.col(p.row_factor).transpose());
}

Vector SvdTriple::right_vector(Index i) const {
  if (i < 0 || i >= size()) throw std::out_of_range("right_vector: index out of range");
  if (structure_ == Structure::dense) return v_.col(i);
  const auto& p = ordering_[static_cast<std::size_t>(i)];
  return vectorize(v_col_.col(p.col_factor) * v_row_.col(p.row_factor).transpose());
}

Vector SvdTriple::coefficients(const Vector& b) const {
  check_length(b, "coefficients");
  if (structure_ == Structure::dense) return u_.transpose() * b;
  const Grid bg = unvectorize(b, rows_, cols_);
  return gather(u_col_.transpose() * bg * u_row_);
}

Vector SvdTriple::right_coefficients(const Vector& x) const {
  check_length(x, "right_coefficients");
  if (structure_ == Structure::dense) return v_.transpose() * x;
  const Grid xg = unvectorize(x, rows_, cols_);
  return gather(v_col_.transpose() * xg * v_row_);
}

Vector SvdTriple::synthesize(const Vector& w) const {
  check_length(w, "synthesize");
  if (structure_ == Structure::dense) return v_ * w;
  return vectorize(v_col_ * scatter(w) * v_row_.transpose());
}

Vector SvdTriple::synthesize_left(const Vector& w) const {
  check_length(w, "synthesize_left");
  if (structure_ == Structure::dense) return u_ * w;
  return vectorize(u_col_ * scatter(w) * u_row_.transpose());
}

Vector SvdTriple::apply(const Vector& x) const {
  return synthesize_left(sigma_.cwiseProduct(right_coefficients(x)));
}

const Eigen::MatrixXd& SvdTriple::u() const {
  if (structure_ != Structure::dense) throw std::logic_error("u(): Kronecker triple has no dense U");
  return u_;
}

const Eigen::MatrixXd& SvdTriple::v() const {
  if (structure_ != Structure::dense) throw std::logic_error("v(): Kronecker triple has no dense V");
  return v_;
}

SvdTriple svd_dense(const DenseOperator& op) {
  if (op.size() > kDenseCap)
    throw std::invalid_argument("svd_dense: N = " + std::to_string(op.size()) + " exceeds the dense cap of " +
                                std::to_string(kDenseCap) + "; use svd_separable");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(op.matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return SvdTriple::dense(svd.matrixU(), svd.singularValues(), svd.matrixV(), op.rows, op.cols);
}

SvdTriple svd_separable(const SeparableBlur& blur) {
  Eigen::BDCSVD<Eigen::MatrixXd> col(blur.col_blur, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::BDCSVD<Eigen::MatrixXd> row(blur.row_blur, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return SvdTriple::kronecker(col.matrixU(), col.singularValues(), col.matrixV(), row.matrixU(),
                              row.singularValues(), row.matrixV());
}

double condition_number(const SvdTriple& svd) {
  const Vector& s = svd.singular_values();
  return condition_number(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())));
}

Vector spectral_coefficients(const SvdTriple& svd, const Vector& b) { return svd.coefficients(b); }

PicardSeries picard_series(const SvdTriple& svd, const Vector& b) {
  PicardSeries p;
  p.sigma = svd.singular_values();
  p.coefficient = svd.coefficients(b);
  p.abs_coefficient = p.coefficient.cwiseAbs();
  p.ratio.resize(p.size());
  for (Index i = 0; i < p.size(); ++i) {
    p.ratio(i) = p.sigma(i) > 0.0 ? p.abs_coefficient(i) / p.sigma(i) : std::numeric_limits<double>::infinity();
  }
  return p;
}

Vector moving_average(const Vector& x, Index window) {
  if (window < 1) throw std::invalid_argument("moving_average: window must be >= 1");
  const Index n = x.size();
  Vector prefix(n + 1);
  prefix(0) = 0.0;
  for (Index i = 0; i < n; ++i) prefix(i + 1) = prefix(i) + x(i);
  const Index half = window / 2;
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    const Index lo = std::max<Index>(0, i - half);
    const Index hi = std::min<Index>(n, i - half + window);
    out(i) = (prefix(hi) - prefix(lo)) / static_cast<double>(hi - lo);
  }
  return out;
}

NoiseEstimate noise_plateau(const PicardSeries& series, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
    throw std::invalid_argument("noise_plateau: tail_fraction must lie in (0, 1)");
  const Index n = series.size();
  if (n == 0) throw std::invalid_argument("noise_plateau: empty series");
  const Index count = std::max<Index>(1, static_cast<Index>(std::llround(tail_fraction * static_cast<double>(n))));
  std::vector<double> tail(series.abs_coefficient.data() + (n - count), series.abs_coefficient.data() + n);
  const auto mid = tail.begin() + static_cast<std::ptrdiff_t>(tail.size() / 2);
  std::nth_element(tail.begin(), mid, tail.end());
  double median = *mid;
  if (tail.size() % 2 == 0) {
    const double lower = *std::max_element(tail.begin(), mid);
    median = 0.5 * (median + lower);
  }
  NoiseEstimate est;
  est.eta = median;
  est.tail_fraction = tail_fraction;
  const Vector avg = moving_average(series.abs_coefficient, std::min<Index>(kPicardWindow, n));
  est.plateau_index = n;
  for (Index i = 0; i < n; ++i) {
    if (avg(i) <= kPlateauFactor * median) {
      est.plateau_index = i;
      break;
    }
  }
  return est;
}

PicardVerdict picard_check(const PicardSeries& series, const NoiseEstimate& noise, Index window,
                           double required_fraction) {
  PicardVerdict v;
  const Index usable = std::min(noise.plateau_index, series.size());
  if (usable < 2) return v;
  Vector ratio = series.ratio.head(usable);
  const Vector avg = moving_average(ratio, std::min(window, usable));
  Index down = 0;
  for (Index i = 0; i + 1 < usable; ++i) down += avg(i + 1) <= avg(i) ? 1 : 0;
  v.checked_steps = usable - 1;
  v.nonincreasing_fraction = static_cast<double>(down) / static_cast<double>(v.checked_steps);
  v.satisfied = v.nonincreasing_fraction >= required_fraction;
  return v;
}

void write_csv(std::ostream& out, const PicardSeries& series) {
  out << "i,sigma,abs_coeff,ratio\n" << std::setprecision(17);
  for (Index i = 0; i < series.size(); ++i) {
    out << (i + 1) << ',' << series.sigma(i) << ',' << series.abs_coefficient(i) << ',' << series.ratio(i) << '\n';
  }
}

}  // namespace deblur
