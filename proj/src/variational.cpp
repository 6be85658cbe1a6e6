#include "deblur/variational.hpp"

#include "deblur/convolution.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace deblur {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Forward differences with a zero last row (d1) or last column (d2).
void forward_differences(const Grid& x, Grid& d1, Grid& d2) {
  const Index m = x.rows();
  const Index n = x.cols();
  d1 = Grid::Zero(m, n);
  d2 = Grid::Zero(m, n);
  if (m > 1) d1.topRows(m - 1) = x.bottomRows(m - 1) - x.topRows(m - 1);
  if (n > 1) d2.leftCols(n - 1) = x.rightCols(n - 1) - x.leftCols(n - 1);
}

Grid forward_differences_adjoint(const Grid& z1, const Grid& z2) {
  const Index m = z1.rows();
  const Index n = z1.cols();
  Grid out = Grid::Zero(m, n);
  if (m > 1) {
    out.bottomRows(m - 1) += z1.topRows(m - 1);
    out.topRows(m - 1) -= z1.topRows(m - 1);
  }
  if (n > 1) {
    out.rightCols(n - 1) += z2.leftCols(n - 1);
    out.leftCols(n - 1) -= z2.leftCols(n - 1);
  }
  return out;
}

void check_shape(const Vector& x, Index rows, Index cols) {
  if (x.size() != rows * cols)
    throw std::invalid_argument("image vector of length " + std::to_string(x.size()) + " does not match " +
                                std::to_string(rows) + "x" + std::to_string(cols));
}

}  // namespace

double p_norm_pow(const Vector& v, double p) {
  if (!(p >= 1.0 && p <= 2.0)) throw std::invalid_argument("p_norm_pow: p must lie in [1, 2]");
  return v.array().abs().pow(p).sum();
}

void validate(const RegularizerSpec& spec) {
  std::visit(overloaded{
                 [](const SmoothNorm&) {},
                 [](const PNorm& r) {
                   if (!(r.p >= 1.0 && r.p < 2.0)) throw std::invalid_argument("PNorm: p must lie in [1, 2)");
                   if (!(r.smoothing > 0.0)) throw std::invalid_argument("PNorm: smoothing must be > 0");
                 },
                 [](const SparseEdge& r) {
                   if (!(r.q > 0.0 && r.q <= 1.0)) throw std::invalid_argument("SparseEdge: q must lie in (0, 1]");
                   if (!(r.epsilon > 0.0)) throw std::invalid_argument("SparseEdge: epsilon must be > 0");
                   if (!(r.strength >= 0.0) || !(r.noise_variance >= 0.0))
                     throw std::invalid_argument("SparseEdge: strength and noise variance must be >= 0");
                 },
                 [](const ZeroCount& r) {
                   if (!(r.threshold >= 0.0)) throw std::invalid_argument("ZeroCount: threshold must be >= 0");
                 },
             },
             spec);
}

std::string_view name(const RegularizerSpec& spec) {
  return std::visit(overloaded{
                        [](const SmoothNorm&) { return std::string_view("smooth"); },
                        [](const PNorm&) { return std::string_view("pnorm"); },
                        [](const SparseEdge&) { return std::string_view("sparse-edge"); },
                        [](const ZeroCount&) { return std::string_view("zero-count"); },
                    },
                    spec);
}

Vector apply_difference(Difference d, const Vector& x, Index rows, Index cols) {
  check_shape(x, rows, cols);
  if (d == Difference::identity) return x;
  Grid d1;
  Grid d2;
  forward_differences(unvectorize(x, rows, cols), d1, d2);
  Vector out(2 * x.size());
  out << vectorize(d1), vectorize(d2);
  return out;
}

Vector apply_difference_adjoint(Difference d, const Vector& y, Index rows, Index cols) {
  const Index n = rows * cols;
  if (d == Difference::identity) {
    check_shape(y, rows, cols);
    return y;
  }
  if (y.size() != 2 * n) throw std::invalid_argument("apply_difference_adjoint: expected length 2N");
  const Grid z1 = unvectorize(y.head(n), rows, cols);
  const Grid z2 = unvectorize(y.tail(n), rows, cols);
  return vectorize(forward_differences_adjoint(z1, z2));
}

Eigen::MatrixXd difference_matrix(Difference d, Index rows, Index cols) {
  const Index n = rows * cols;
  if (d == Difference::identity) return Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd out(2 * n, n);
  for (Index q = 0; q < n; ++q) {
    Vector e = Vector::Zero(n);
    e(q) = 1.0;
    out.col(q) = apply_difference(d, e, rows, cols);
  }
  return out;
}

Vector edge_magnitude(const Vector& x, Index rows, Index cols) {
  check_shape(x, rows, cols);
  Grid d1;
  Grid d2;
  forward_differences(unvectorize(x, rows, cols), d1, d2);
  const Grid f = (d1.array().square() + d2.array().square() + kEdgeSmoothing * kEdgeSmoothing).sqrt();
  return vectorize(f);
}

namespace {

ValueAndGradient evaluate(const RegularizerSpec& spec, const Vector& x, Index rows, Index cols, bool want_gradient) {
  check_shape(x, rows, cols);
  validate(spec);
  return std::visit(
      overloaded{
          [&](const SmoothNorm& r) -> ValueAndGradient {
            const Vector v = apply_difference(r.d, x, rows, cols);
            ValueAndGradient out{v.squaredNorm(), {}};
            if (want_gradient) out.gradient = 2.0 * apply_difference_adjoint(r.d, v, rows, cols);
            return out;
          },
          [&](const PNorm& r) -> ValueAndGradient {
            const Vector v = apply_difference(r.d, x, rows, cols);
            const Eigen::ArrayXd s = v.array().square() + r.smoothing * r.smoothing;
            ValueAndGradient out{s.pow(0.5 * r.p).sum(), {}};
            if (want_gradient) {
              const Vector w = (r.p * v.array() * s.pow(0.5 * r.p - 1.0)).matrix();
              out.gradient = apply_difference_adjoint(r.d, w, rows, cols);
            }
            return out;
          },
          [&](const SparseEdge& r) -> ValueAndGradient {
            Grid d1;
            Grid d2;
            forward_differences(unvectorize(x, rows, cols), d1, d2);
            const Eigen::ArrayXXd f =
                (d1.array().square() + d2.array().square() + kEdgeSmoothing * kEdgeSmoothing).sqrt();
            const Eigen::ArrayXXd shifted = f + r.epsilon;
            ValueAndGradient out{shifted.pow(r.q).sum(), {}};
            if (want_gradient) {
              // d/dx (f + eps)^q = q (f + eps)^(q-1) * (d1 dd1 + d2 dd2) / f
              const Eigen::ArrayXXd w = r.q * shifted.pow(r.q - 1.0) / f;
              const Grid z1 = (w * d1.array()).matrix();
              const Grid z2 = (w * d2.array()).matrix();
              out.gradient = vectorize(forward_differences_adjoint(z1, z2));
            }
            return out;
          },
          [&](const ZeroCount& r) -> ValueAndGradient {
            if (want_gradient) throw std::logic_error("ZeroCount regularizer is evaluation-only (no gradient)");
            const Vector v = apply_difference(r.d, x, rows, cols);
            return {static_cast<double>((v.array().abs() > r.threshold).count()), {}};
          },
      },
      spec);
}

}  // namespace

double regularizer_value(const RegularizerSpec& spec, const Vector& x, Index rows, Index cols) {
  return evaluate(spec, x, rows, cols, false).value;
}

ValueAndGradient regularizer_value_and_gradient(const RegularizerSpec& spec, const Vector& x, Index rows,
                                                Index cols) {
  return evaluate(spec, x, rows, cols, true);
}

Vector tikhonov_stacked_solve(const DenseOperator& a, const Vector& b, double alpha, const Eigen::MatrixXd& d) {
  const Index n = a.size();
  if (n > kDenseCap) throw std::invalid_argument("tikhonov_stacked_solve: N exceeds the dense cap");
  if (!(alpha > 0.0)) throw std::invalid_argument("tikhonov_stacked_solve: alpha must be > 0");
  if (b.size() != n) throw std::invalid_argument("tikhonov_stacked_solve: b has the wrong length");
  if (d.cols() != n) throw std::invalid_argument("tikhonov_stacked_solve: D must have N columns");
  Eigen::MatrixXd stacked(n + d.rows(), n);
  stacked << a.matrix, alpha * d;
  Vector rhs = Vector::Zero(n + d.rows());
  rhs.head(n) = b;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stacked);
  if (qr.rank() < n) throw std::domain_error("tikhonov_stacked_solve: stacked matrix is rank deficient");
  return qr.solve(rhs);
}

Vector tikhonov_stacked_solve(const DenseOperator& a, const Vector& b, double alpha, Difference d) {
  return tikhonov_stacked_solve(a, b, alpha, difference_matrix(d, a.rows, a.cols));
}

GdResult gradient_reconstruct(const LinearOperator& a, const Vector& b, const RegularizerSpec& reg,
                              const GdConfig& cfg) {
  if (!(cfg.step > 0.0)) throw std::invalid_argument("gradient_reconstruct: step size must be > 0");
  if (cfg.max_iterations < 1) throw std::invalid_argument("gradient_reconstruct: max_iterations must be >= 1");
  if (!(cfg.lambda >= 0.0)) throw std::invalid_argument("gradient_reconstruct: lambda must be >= 0");
  if (b.size() != a.size()) throw std::invalid_argument("gradient_reconstruct: b has the wrong length");
  validate(reg);
  if (std::holds_alternative<ZeroCount>(reg))
    throw std::invalid_argument("gradient_reconstruct: ZeroCount is evaluation-only");

  const Index m = a.rows();
  const Index n = a.cols();
  Vector x;
  switch (cfg.init) {
    case GdConfig::Init::zero: x = Vector::Zero(a.size()); break;
    case GdConfig::Init::observation: x = b; break;
    case GdConfig::Init::provided:
      if (cfg.start.size() != a.size()) throw std::invalid_argument("gradient_reconstruct: start has wrong length");
      x = cfg.start;
      break;
  }

  auto objective = [&](const Vector& v, Vector* grad, TraceEntry& t) {
    const Vector r = a.apply(v) - b;
    ValueAndGradient rg = cfg.lambda > 0.0 ? regularizer_value_and_gradient(reg, v, m, n)
                                           : ValueAndGradient{regularizer_value(reg, v, m, n), {}};
    t.residual_norm = r.norm();
    t.reg_value = rg.value;
    t.objective = r.squaredNorm() + cfg.lambda * rg.value;
    if (grad) {
      *grad = 2.0 * a.adjoint(r);
      if (cfg.lambda > 0.0) *grad += cfg.lambda * rg.gradient;
    }
  };

  GdResult out;
  Vector grad;
  TraceEntry t0;
  objective(x, &grad, t0);
  out.trace.push_back(t0);
  const double initial = t0.objective;
  double previous = initial;
  for (int k = 1; k <= cfg.max_iterations; ++k) {
    if (cfg.gradient_tolerance > 0.0 && grad.norm() <= cfg.gradient_tolerance) {
      out.converged = true;
      break;
    }
    x -= cfg.step * grad;
    TraceEntry t;
    t.iteration = k;
    objective(x, &grad, t);
    out.trace.push_back(t);
    if (!std::isfinite(t.objective) || t.objective > 10.0 * std::max(initial, std::numeric_limits<double>::min()))
      throw std::runtime_error("gradient_reconstruct: objective diverged (step size too large)");
    if (cfg.relative_tolerance > 0.0 &&
        std::abs(previous - t.objective) <= cfg.relative_tolerance * std::abs(previous)) {
      out.converged = true;
      break;
    }
    previous = t.objective;
  }
  out.x = std::move(x);
  return out;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace) {
  out << "iteration,objective,residual_norm,reg_value\n" << std::setprecision(17);
  for (const auto& t : trace) out << t.iteration << ',' << t.objective << ',' << t.residual_norm << ',' << t.reg_value << '\n';
}

std::vector<double> lambda_schedule(double start, double ratio, int levels, double floor) {
  if (!(start > 0.0)) throw std::invalid_argument("lambda_schedule: start must be > 0");
  if (!(ratio > 1.0)) throw std::invalid_argument("lambda_schedule: ratio must be > 1");
  if (levels < 1) throw std::invalid_argument("lambda_schedule: need at least one level");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(levels));
  for (int i = 0; i < levels; ++i) out.push_back(std::max(floor, start / std::pow(ratio, i)));
  return out;
}

double map_objective(const Grid& y, const Grid& x, const Grid& h, double lambda, const SparseEdge& prior,
                     BoundaryCondition bc) {
  const Grid r = convolve2d_taps(x, h, bc) - y;
  const double reg = regularizer_value(prior, vectorize(x), x.rows(), x.cols());
  return 0.5 * r.squaredNorm() + lambda * reg;
}

namespace {

// Clip negatives and rescale to unit sum; false if nothing survives.
bool project_kernel(Vector& h) {
  h = h.cwiseMax(0.0);
  const double s = h.sum();
  if (!(s > 0.0) || !std::isfinite(s)) return false;
  h /= s;
  return true;
}

// Columns are the shifted copies of x that multiply each kernel tap, so that
// vec(convolve2d_taps(x, h)) == shifts * vec(h).
Eigen::MatrixXd shift_matrix(const Grid& x, Index k, BoundaryCondition bc) {
  const Index h = (k - 1) / 2;
  const Index m = x.rows();
  const Index n = x.cols();
  const Grid xp = pad(x, bc, h);
  Eigen::MatrixXd out(m * n, k * k);
  for (Index t = 0; t < k; ++t)
    for (Index s = 0; s < k; ++s)
      out.col(t * k + s) = vectorize(xp.block(2 * h - s, 2 * h - t, m, n));
  return out;
}

// Minimizes the quadratic majorizer of the prior at the current x by
// warm-started conjugate gradients.
Grid image_step(const Grid& x, const Grid& y, const Psf& h, double lambda, const SparseEdge& prior,
                BoundaryCondition bc, int passes) {
  Grid d1;
  Grid d2;
  forward_differences(x, d1, d2);
  const Eigen::ArrayXXd f = (d1.array().square() + d2.array().square() + kEdgeSmoothing * kEdgeSmoothing).sqrt();
  const Eigen::ArrayXXd w = prior.q * (f + prior.epsilon).pow(prior.q - 1.0) / f;
  auto normal = [&](const Grid& v) {
    Grid e1;
    Grid e2;
    forward_differences(v, e1, e2);
    const Grid z1 = (w * e1.array()).matrix();
    const Grid z2 = (w * e2.array()).matrix();
    return Grid(convolve2d_adjoint(convolve2d(v, h, bc), h, bc) + lambda * forward_differences_adjoint(z1, z2));
  };
  Grid out = x;
  Grid r = convolve2d_adjoint(y, h, bc) - normal(out);
  Grid p = r;
  double rr = r.squaredNorm();
  for (int it = 0; it < passes && rr > 0.0; ++it) {
    const Grid ap = normal(p);
    const double pap = (p.array() * ap.array()).sum();
    if (!(pap > 0.0)) break;
    const double a = rr / pap;
    out += a * p;
    r -= a * ap;
    const double next = r.squaredNorm();
    p = r + (next / rr) * p;
    rr = next;
  }
  return out;
}

}  // namespace

MapResult map_blind_deblur(const Grid& y, const MapConfig& cfg) {
  const Index m = y.rows();
  const Index n = y.cols();
  const Index k = cfg.kernel_size;
  if (k < 1 || k % 2 == 0) throw std::invalid_argument("map_blind_deblur: kernel size must be odd");
  if (k > std::min(m, n)) throw std::invalid_argument("map_blind_deblur: kernel larger than image");
  if (cfg.x_inner < 0 || cfg.h_inner < 0) throw std::invalid_argument("map_blind_deblur: inner passes must be >= 0");
  if (!(cfg.h_step > 0.0)) throw std::invalid_argument("map_blind_deblur: h_step must be > 0");
  if (cfg.iterations_per_level < 1) throw std::invalid_argument("map_blind_deblur: iterations_per_level must be >= 1");
  validate(cfg.prior);
  if (!y.allFinite()) throw std::invalid_argument("map_blind_deblur: observation has non-finite pixels");

  const auto schedule = lambda_schedule(cfg.lambda_start, cfg.ratio, cfg.levels,
                                        cfg.prior.strength * cfg.prior.noise_variance);
  const Vector yv = vectorize(y);
  Grid x = y;
  Vector h = vectorize(Psf::delta(k).weights());

  MapResult result;
  for (const double lambda : schedule) {
    MapStage stage;
    stage.lambda = lambda;
    double j = map_objective(y, x, unvectorize(h, k, k), lambda, cfg.prior, cfg.bc);
    if (!std::isfinite(j)) throw std::runtime_error("map_blind_deblur: non-finite objective");
    stage.objective.push_back(j);
    for (int it = 0; it < cfg.iterations_per_level; ++it) {
      const double start = j;
      const Psf hp = Psf::from_weights(unvectorize(h, k, k));
      const Grid xn = image_step(x, y, hp, lambda, cfg.prior, cfg.bc, cfg.x_inner);
      const double jx = map_objective(y, xn, hp.weights(), lambda, cfg.prior, cfg.bc);
      if (std::isfinite(jx) && jx <= j) {
        x = xn;
        j = jx;
      }

      const Eigen::MatrixXd s = shift_matrix(x, k, cfg.bc);
      const Eigen::MatrixXd gram = s.transpose() * s;
      const Vector rhs = s.transpose() * yv;
      // Steps stay on the unit-sum plane, so only the curvature across it matters.
      const Eigen::MatrixXd plane =
          Eigen::MatrixXd::Identity(k * k, k * k) - Eigen::MatrixXd::Constant(k * k, k * k, 1.0 / double(k * k));
      const double lipschitz = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(plane * gram * plane,
                                                                             Eigen::EigenvaluesOnly)
                                   .eigenvalues()
                                   .maxCoeff();
      Vector trial = h;
      bool moved = false;
      for (int pass = 0; pass < cfg.h_inner && lipschitz > 0.0; ++pass) {
        Vector g = gram * trial - rhs;
        g.array() -= g.mean();
        Vector next = trial - (cfg.h_step / lipschitz) * g;
        if (!project_kernel(next)) break;
        trial = std::move(next);
        moved = true;
      }
      // The kernel update is kept when the whole alternating iteration does
      // not raise the objective.
      if (moved) {
        const double jh = map_objective(y, x, unvectorize(trial, k, k), lambda, cfg.prior, cfg.bc);
        if (std::isfinite(jh) && jh <= start) {
          h = std::move(trial);
          j = jh;
        }
      }
      if (!std::isfinite(j)) throw std::runtime_error("map_blind_deblur: non-finite objective");
      stage.objective.push_back(j);
    }
    result.stages.push_back(std::move(stage));
  }
  result.x = std::move(x);
  result.kernel = Psf::from_weights(unvectorize(h, k, k));
  return result;
}

double kernel_similarity(const Psf& a, const Psf& b) {
  const Index k = std::max(a.size(), b.size());
  auto embed = [k](const Psf& p) {
    Grid g = Grid::Zero(k, k);
    const Index off = (k - p.size()) / 2;
    g.block(off, off, p.size(), p.size()) = p.weights();
    return g;
  };
  const Grid ga = embed(a);
  const Grid gb = embed(b);
  const Grid za = ga.array() - ga.mean();
  const double na = za.norm();
  const Index reach = k / 2;
  double best = -1.0;
  for (Index di = -reach; di <= reach; ++di) {
    for (Index dj = -reach; dj <= reach; ++dj) {
      Grid shifted = Grid::Zero(k, k);
      for (Index j = 0; j < k; ++j) {
        for (Index i = 0; i < k; ++i) {
          const Index si = i - di;
          const Index sj = j - dj;
          if (si >= 0 && si < k && sj >= 0 && sj < k) shifted(i, j) = gb(si, sj);
        }
      }
      const Grid zb = shifted.array() - shifted.mean();
      const double nb = zb.norm();
      if (na == 0.0 || nb == 0.0) continue;
      best = std::max(best, (za.array() * zb.array()).sum() / (na * nb));
    }
  }
  return best;
}

}  // namespace deblur
