#pragma once

#include "deblur/spectral.hpp"

#include <iosfwd>
#include <variant>

namespace deblur {

struct Tsvd {
  Index truncation = 1;  // keep the leading k components
};

struct Tikhonov {
  double alpha = 0.0;  // phi_i = sigma_i^2 / (sigma_i^2 + alpha^2)
};

struct CustomFilter {
  Vector phi;  // entries in [0, 1]
};

using FilterSpec = std::variant<Tsvd, Tikhonov, CustomFilter>;

/// Filter factors for sorted singular values. TSVD truncation beyond the
/// number of nonzero singular values is capped silently.
Vector filter_factors(const FilterSpec& spec, const Vector& sigma);

/// x = sum_i phi_i (u_i^T b / sigma_i) v_i.
Vector filtered_reconstruct(const SvdTriple& svd, const Vector& b, const FilterSpec& spec);
/// Same sum for precomputed coefficients c = U^T b and factors phi.
Vector filtered_reconstruct(const SvdTriple& svd, const Vector& coefficients, const Vector& phi);

struct SolutionNorms {
  double residual = 0.0;  // ||b - A x||_2
  double solution = 0.0;  // ||x||_2
};

/// Closed-form norms from spectral sums; no reconstruction is formed.
SolutionNorms residual_and_solution_norms(const SvdTriple& svd, const Vector& b, const FilterSpec& spec);
SolutionNorms residual_and_solution_norms(const Vector& sigma, const Vector& coefficients, double b_norm_sq,
                                          const Vector& phi);

/// Split of x_true - x_filtered for b = A x_true + e:
///   regularization error (I - V Phi V^T) x_true
///   perturbation error   V Phi Sigma^-1 U^T e
struct ErrorSplit {
  Vector x_filtered;
  Vector regularization_error;
  Vector perturbation_error;
  double regularization_norm = 0.0;  // direct 2-norms
  double perturbation_norm = 0.0;
  double regularization_norm_sq_closed = 0.0;  // sum ((1 - phi_i) u_i^T b_exact / sigma_i)^2
  double perturbation_norm_sq_closed = 0.0;    // sum (phi_i u_i^T e / sigma_i)^2
};

ErrorSplit error_decomposition(const SvdTriple& svd, const FilterSpec& spec, const Vector& x_true, const Vector& e);

/// Columns: i,sigma,phi (i is 1-based).
void write_filter_csv(std::ostream& out, const Vector& sigma, const Vector& phi);

}  // namespace deblur
