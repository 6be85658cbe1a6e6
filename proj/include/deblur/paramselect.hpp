#pragma once

#include "deblur/operator.hpp"
#include "deblur/spectral.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <random>
#include <string_view>
#include <vector>

namespace deblur {

enum class SelectionMethod { fixed, gcv_tikhonov, gcv_tsvd, lcurve, discrepancy };

std::string_view to_string(SelectionMethod method);

/// Outcome of a regularization-parameter search plus the curve it scanned.
struct SelectionResult {
  SelectionMethod method = SelectionMethod::fixed;
  double alpha = 0.0;     // Tikhonov parameter (all methods but gcv_tsvd)
  Index truncation = 0;   // gcv_tsvd only
  Index chosen_index = -1;

  std::vector<double> grid;       // alpha values, or k for gcv_tsvd
  std::vector<double> objective;  // G(alpha) or G(k)

  // L-curve points (log10 residual, log10 solution norm) and signed curvature.
  std::vector<double> log_residual;
  std::vector<double> log_solution;
  std::vector<double> curvature;

  double target_residual = std::numeric_limits<double>::quiet_NaN();
  double achieved_residual = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
};

/// `count` log-spaced values over [smallest positive sigma, sigma_1].
std::vector<double> default_alpha_grid(const Vector& sigma, int count = 60);

/// Simplified Tikhonov GCV:
///   G(alpha) = sum_i (c_i / (sigma_i^2 + alpha^2))^2 / (sum_i 1 / (sigma_i^2 + alpha^2))^2
double gcv_tikhonov_value(const Vector& sigma, const Vector& coefficients, double alpha);

SelectionResult gcv_tikhonov(const SvdTriple& svd, const Vector& b, const std::vector<double>& alpha_grid);

/// G(k) = sum_{i>k} c_i^2 / (N - k)^2 for k = 1..N-1; ties go to the smaller k.
SelectionResult gcv_tsvd(const SvdTriple& svd, const Vector& b);

/// Corner of the log-log L-curve by maximum signed Menger curvature.
SelectionResult lcurve(const SvdTriple& svd, const Vector& b, const std::vector<double>& alpha_grid);

/// Signed Menger curvature at interior points (endpoints are 0) and the
/// corner index; ties go to the later point. Throws if the curve has no bend.
struct CornerResult {
  std::vector<double> curvature;
  Index corner = -1;
};
CornerResult lcurve_corner(const std::vector<double>& x, const std::vector<double>& y);

/// Bisection on log(alpha) for ||b - A x_alpha|| = tau * noise_norm.
/// Returns alpha = 0 when the target is at the smallest achievable residual.
SelectionResult discrepancy(const SvdTriple& svd, const Vector& b, double noise_norm, double tau = 1.0);

/// Closed-form Tikhonov residual norm ||b - A x_alpha||_2.
double tikhonov_residual(const Vector& sigma, const Vector& coefficients, double alpha);

/// Monte-Carlo mean of 2 ||A^T e||_2 over `trials` noise draws.
double estimate_lambda(const std::function<Vector(const Vector&)>& adjoint,
                       const std::function<Vector(std::mt19937_64&)>& noise_sampler, int trials,
                       std::uint64_t seed);
/// White Gaussian noise of per-component standard deviation `noise_std`.
double estimate_lambda(const DenseOperator& op, double noise_std, int trials, std::uint64_t seed);

/// Columns: alpha,G
void write_gcv_csv(std::ostream& out, const SelectionResult& result);
/// Columns: alpha,log_residual,log_solution,curvature
void write_lcurve_csv(std::ostream& out, const SelectionResult& result);

}  // namespace deblur
