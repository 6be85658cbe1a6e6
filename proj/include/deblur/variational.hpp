#pragma once

#include "deblur/linear_operator.hpp"
#include "deblur/operator.hpp"
#include "deblur/psf.hpp"

#include <iosfwd>
#include <string_view>
#include <variant>
#include <vector>

namespace deblur {

/// sum_i |v_i|^p, the p-th power of the p-norm.
double p_norm_pow(const Vector& v, double p);

/// Regularization matrix D acting on a column-stacked m x n image.
enum class Difference {
  identity,          // D = I
  first_difference,  // D = [D_1; D_2], forward differences down rows and across columns
};

/// ||D x||_2^2
struct SmoothNorm {
  Difference d = Difference::identity;
};

/// sum_i ((Dx)_i^2 + smoothing^2)^(p/2), 1 <= p < 2
struct PNorm {
  Difference d = Difference::first_difference;
  double p = 1.2;
  double smoothing = 1e-3;
};

/// Sparse edge prior sum_i (f_i(x) + epsilon)^q with f the gradient magnitude.
/// `strength` and `noise_variance` are the prior weight k and sigma^2; the
/// variational solvers take their weight from the caller, the blind solver
/// uses them as the floor of its lambda schedule.
struct SparseEdge {
  double q = 0.7;
  double epsilon = 1e-3;
  double strength = 1.0;
  double noise_variance = 0.0;
};

/// Number of entries of D x with magnitude above `threshold`. No gradient.
struct ZeroCount {
  Difference d = Difference::first_difference;
  double threshold = 0.0;
};

using RegularizerSpec = std::variant<SmoothNorm, PNorm, SparseEdge, ZeroCount>;

/// Smoothing inside the gradient magnitude: f = sqrt(d1^2 + d2^2 + eps_f^2).
inline constexpr double kEdgeSmoothing = 1e-8;

void validate(const RegularizerSpec& spec);
std::string_view name(const RegularizerSpec& spec);

Vector apply_difference(Difference d, const Vector& x, Index rows, Index cols);
Vector apply_difference_adjoint(Difference d, const Vector& y, Index rows, Index cols);
Eigen::MatrixXd difference_matrix(Difference d, Index rows, Index cols);

/// Smoothed gradient magnitude per pixel.
Vector edge_magnitude(const Vector& x, Index rows, Index cols);

struct ValueAndGradient {
  double value = 0.0;
  Vector gradient;
};

double regularizer_value(const RegularizerSpec& spec, const Vector& x, Index rows, Index cols);
/// Throws std::logic_error for ZeroCount, which is evaluation-only.
ValueAndGradient regularizer_value_and_gradient(const RegularizerSpec& spec, const Vector& x, Index rows,
                                                Index cols);

/// min ||[b; 0] - [A; alpha D] x||_2 by column-pivoted Householder QR.
Vector tikhonov_stacked_solve(const DenseOperator& a, const Vector& b, double alpha, const Eigen::MatrixXd& d);
Vector tikhonov_stacked_solve(const DenseOperator& a, const Vector& b, double alpha,
                              Difference d = Difference::identity);

struct GdConfig {
  enum class Init { zero, observation, provided };

  double step = 0.7;
  double lambda = 0.3;
  int max_iterations = 1500;
  /// Stop when |f_k - f_{k-1}| <= relative_tolerance * |f_{k-1}| (0 disables).
  double relative_tolerance = 1e-6;
  /// Stop when the gradient norm drops to this value (0 disables).
  double gradient_tolerance = 0.0;
  Init init = Init::observation;
  Vector start;  // used with Init::provided
};

struct TraceEntry {
  int iteration = 0;
  double objective = 0.0;
  double residual_norm = 0.0;
  double reg_value = 0.0;
};

struct GdResult {
  Vector x;
  std::vector<TraceEntry> trace;  // entry 0 is the starting point
  bool converged = false;
};

/// Fixed-step descent on ||A x - b||^2 + lambda * R(x).
GdResult gradient_reconstruct(const LinearOperator& a, const Vector& b, const RegularizerSpec& reg,
                              const GdConfig& cfg);

void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace);

struct MapConfig {
  Index kernel_size = 7;
  SparseEdge prior{};
  double lambda_start = 2.0;
  double ratio = 1.5;
  int levels = 6;
  int iterations_per_level = 200;
  /// Conjugate-gradient passes per image step on the reweighted quadratic
  /// majorizer of the objective.
  int x_inner = 10;
  /// Projected gradient passes per kernel step, each of length h_step / L
  /// with L the Lipschitz constant of the kernel data term.
  int h_inner = 300;
  double h_step = 1.0;
  BoundaryCondition bc = BoundaryCondition::reflexive;
};

/// lambda_n = start / ratio^(n-1), n = 1..levels, never below `floor`.
std::vector<double> lambda_schedule(double start, double ratio, int levels, double floor = 0.0);

struct MapStage {
  double lambda = 0.0;
  std::vector<double> objective;  // one entry per outer iteration, starting value first
};

struct MapResult {
  Grid x;
  Psf kernel = Psf::delta(1);
  std::vector<MapStage> stages;
};

/// 1/2 ||y - h * x||^2 + lambda * sum_i (f_i(x) + epsilon)^q
double map_objective(const Grid& y, const Grid& x, const Grid& h, double lambda, const SparseEdge& prior,
                     BoundaryCondition bc);

/// Alternating descent on the objective above over a decreasing lambda
/// schedule, starting from x = y and the delta kernel. The image step runs
/// conjugate gradients on a reweighted quadratic that majorizes the prior;
/// the kernel step runs projected gradient on the data term, clipping at zero
/// and renormalizing to unit sum after every pass. Neither step may increase
/// the objective.
MapResult map_blind_deblur(const Grid& y, const MapConfig& cfg);

/// Peak zero-mean normalized cross-correlation over integer shifts of up to
/// half the kernel size.
double kernel_similarity(const Psf& a, const Psf& b);

}  // namespace deblur
