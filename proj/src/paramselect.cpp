#include "deblur/paramselect.hpp"

#include "deblur/filters.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace deblur {

std::string_view to_string(SelectionMethod method) {
  switch (method) {
    case SelectionMethod::fixed: return "fixed";
    case SelectionMethod::gcv_tikhonov: return "gcv";
    case SelectionMethod::gcv_tsvd: return "gcv-tsvd";
    case SelectionMethod::lcurve: return "lcurve";
    case SelectionMethod::discrepancy: return "discrepancy";
  }
  return "?";
}

std::vector<double> default_alpha_grid(const Vector& sigma, int count) {
  if (count < 2) throw std::invalid_argument("default_alpha_grid: need at least 2 points");
  double lo = 0.0;
  for (Index i = sigma.size() - 1; i >= 0; --i) {
    if (sigma(i) > 0.0) {
      lo = sigma(i);
      break;
    }
  }
  if (!(lo > 0.0)) throw std::invalid_argument("default_alpha_grid: no positive singular value");
  const double hi = sigma.maxCoeff();
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

double gcv_tikhonov_value(const Vector& sigma, const Vector& coefficients, double alpha) {
  const double a2 = alpha * alpha;
  double num = 0.0;
  double den = 0.0;
  for (Index i = 0; i < sigma.size(); ++i) {
    const double w = 1.0 / (sigma(i) * sigma(i) + a2);
    const double t = w * coefficients(i);
    num += t * t;
    den += w;
  }
  return num / (den * den);
}

SelectionResult gcv_tikhonov(const SvdTriple& svd, const Vector& b, const std::vector<double>& alpha_grid) {
  if (alpha_grid.empty()) throw std::invalid_argument("gcv_tikhonov: empty alpha grid");
  for (double a : alpha_grid) {
    if (!(a > 0.0)) throw std::invalid_argument("gcv_tikhonov: grid values must be > 0");
  }
  const Vector& sigma = svd.singular_values();
  const Vector c = svd.coefficients(b);
  SelectionResult r;
  r.method = SelectionMethod::gcv_tikhonov;
  r.grid = alpha_grid;
  r.objective.resize(alpha_grid.size());
  const auto count = static_cast<std::ptrdiff_t>(alpha_grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    r.objective[static_cast<std::size_t>(i)] = gcv_tikhonov_value(sigma, c, alpha_grid[static_cast<std::size_t>(i)]);
  }
  // First minimum in grid order.
  const auto best = std::min_element(r.objective.begin(), r.objective.end());
  r.chosen_index = best - r.objective.begin();
  r.alpha = alpha_grid[static_cast<std::size_t>(r.chosen_index)];
  return r;
}

SelectionResult gcv_tsvd(const SvdTriple& svd, const Vector& b) {
  const Index n = svd.size();
  if (n < 2) throw std::invalid_argument("gcv_tsvd: need N >= 2");
  const Vector c = svd.coefficients(b);
  // tail(k) = sum_{i > k} c_i^2 with 1-based i.
  Vector tail(n + 1);
  tail(n) = 0.0;
  for (Index k = n - 1; k >= 0; --k) tail(k) = tail(k + 1) + c(k) * c(k);
  SelectionResult r;
  r.method = SelectionMethod::gcv_tsvd;
  double best = std::numeric_limits<double>::infinity();
  for (Index k = 1; k <= n - 1; ++k) {
    const double d = static_cast<double>(n - k);
    const double g = tail(k) / (d * d);
    r.grid.push_back(static_cast<double>(k));
    r.objective.push_back(g);
    if (g < best) {
      best = g;
      r.truncation = k;
      r.chosen_index = k - 1;
    }
  }
  return r;
}

CornerResult lcurve_corner(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw std::invalid_argument("lcurve_corner: coordinate lengths differ");
  if (n < 5) throw std::invalid_argument("lcurve_corner: need at least 5 points");
  CornerResult out;
  out.curvature.assign(n, 0.0);
  double xmin = *std::min_element(x.begin(), x.end());
  double xmax = *std::max_element(x.begin(), x.end());
  double ymin = *std::min_element(y.begin(), y.end());
  double ymax = *std::max_element(y.begin(), y.end());
  const double extent = std::hypot(xmax - xmin, ymax - ymin);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double ax = x[i] - x[i - 1];
    const double ay = y[i] - y[i - 1];
    const double bx = x[i + 1] - x[i];
    const double by = y[i + 1] - y[i];
    const double cx = x[i + 1] - x[i - 1];
    const double cy = y[i + 1] - y[i - 1];
    const double la = std::hypot(ax, ay);
    const double lb = std::hypot(bx, by);
    const double lc = std::hypot(cx, cy);
    double k = 0.0;
    if (la > 0.0 && lb > 0.0 && lc > 0.0) k = 2.0 * (ax * by - ay * bx) / (la * lb * lc);
    out.curvature[i] = k;
    if (k >= best) {
      best = k;
      out.corner = static_cast<Index>(i);
    }
  }
  // Curvature times extent is scale free; a straight or outward-bent curve has no corner.
  if (!(extent > 0.0) || !(best * extent > 1e-6)) throw std::domain_error("lcurve: no corner (degenerate curve)");
  return out;
}

SelectionResult lcurve(const SvdTriple& svd, const Vector& b, const std::vector<double>& alpha_grid) {
  if (alpha_grid.size() < 5) throw std::invalid_argument("lcurve: need at least 5 grid points");
  if (!std::is_sorted(alpha_grid.begin(), alpha_grid.end()) || !(alpha_grid.front() > 0.0))
    throw std::invalid_argument("lcurve: grid must be positive and ascending");
  const Vector& sigma = svd.singular_values();
  const Vector c = svd.coefficients(b);
  const double b2 = c.squaredNorm();
  SelectionResult r;
  r.method = SelectionMethod::lcurve;
  r.grid = alpha_grid;
  const std::size_t n = alpha_grid.size();
  r.log_residual.resize(n);
  r.log_solution.resize(n);
  constexpr double kFloor = 1e-300;
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const Vector phi = filter_factors(Tikhonov{alpha_grid[i]}, sigma);
    const SolutionNorms s = residual_and_solution_norms(sigma, c, b2, phi);
    r.log_residual[i] = std::log10(std::max(s.residual, kFloor));
    r.log_solution[i] = std::log10(std::max(s.solution, kFloor));
  }
  CornerResult corner = lcurve_corner(r.log_residual, r.log_solution);
  r.curvature = std::move(corner.curvature);
  r.chosen_index = corner.corner;
  r.alpha = alpha_grid[static_cast<std::size_t>(corner.corner)];
  return r;
}

double tikhonov_residual(const Vector& sigma, const Vector& coefficients, double alpha) {
  const double a2 = alpha * alpha;
  double res = 0.0;
  for (Index i = 0; i < sigma.size(); ++i) {
    const double s2 = sigma(i) * sigma(i);
    // alpha = 0 leaves only components with sigma_i = 0.
    const double f = (s2 + a2) > 0.0 ? a2 / (s2 + a2) : 1.0;
    const double t = f * coefficients(i);
    res += t * t;
  }
  return std::sqrt(res);
}

SelectionResult discrepancy(const SvdTriple& svd, const Vector& b, double noise_norm, double tau) {
  if (!(noise_norm >= 0.0)) throw std::invalid_argument("discrepancy: noise norm must be >= 0");
  if (!(tau >= 1.0)) throw std::invalid_argument("discrepancy: safety factor must be >= 1");
  const Vector& sigma = svd.singular_values();
  const Vector c = svd.coefficients(b);
  const double target = tau * noise_norm;
  const double lo_res = tikhonov_residual(sigma, c, 0.0);
  const double hi_res = c.norm();

  SelectionResult r;
  r.method = SelectionMethod::discrepancy;
  r.target_residual = target;
  const double slack = 1e-12 * std::max(hi_res, 1e-300);
  if (target > hi_res + slack || target < lo_res - slack) {
    std::ostringstream msg;
    msg << "discrepancy: target residual " << target << " outside the feasible range [" << lo_res << ", "
        << hi_res << "]";
    throw std::domain_error(msg.str());
  }
  if (target <= lo_res + slack) {
    r.alpha = 0.0;
    r.achieved_residual = lo_res;
    return r;
  }
  const double s1 = sigma.maxCoeff();
  double lo = std::log(s1 * 1e-8);
  double hi = std::log(s1 * 1e8);
  while (tikhonov_residual(sigma, c, std::exp(lo)) > target && lo > -700.0) lo -= 10.0;
  while (tikhonov_residual(sigma, c, std::exp(hi)) < target && hi < 700.0) hi += 10.0;
  double mid = 0.5 * (lo + hi);
  double res = tikhonov_residual(sigma, c, std::exp(mid));
  int it = 0;
  for (; it < 300; ++it) {
    mid = 0.5 * (lo + hi);
    res = tikhonov_residual(sigma, c, std::exp(mid));
    if (std::abs(res - target) <= 1e-12 * target || hi - lo < 1e-15) break;
    if (res < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  r.alpha = std::exp(mid);
  r.achieved_residual = res;
  r.iterations = it + 1;
  return r;
}

double estimate_lambda(const std::function<Vector(const Vector&)>& adjoint,
                       const std::function<Vector(std::mt19937_64&)>& noise_sampler, int trials,
                       std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("estimate_lambda: trials must be >= 1");
  std::mt19937_64 rng(seed);
  double sum = 0.0;
  for (int t = 0; t < trials; ++t) sum += 2.0 * adjoint(noise_sampler(rng)).norm();
  return sum / trials;
}

double estimate_lambda(const DenseOperator& op, double noise_std, int trials, std::uint64_t seed) {
  const Index n = op.size();
  auto sampler = [n, noise_std](std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, noise_std);
    Vector e(n);
    for (Index i = 0; i < n; ++i) e(i) = normal(rng);
    return e;
  };
  return estimate_lambda([&](const Vector& e) -> Vector { return op.matrix.transpose() * e; }, sampler, trials,
                         seed);
}

void write_gcv_csv(std::ostream& out, const SelectionResult& result) {
  out << (result.method == SelectionMethod::gcv_tsvd ? "k,G\n" : "alpha,G\n") << std::setprecision(17);
  for (std::size_t i = 0; i < result.grid.size(); ++i) out << result.grid[i] << ',' << result.objective[i] << '\n';
}

void write_lcurve_csv(std::ostream& out, const SelectionResult& result) {
  out << "alpha,log_residual,log_solution,curvature\n" << std::setprecision(17);
  for (std::size_t i = 0; i < result.grid.size(); ++i) {
    out << result.grid[i] << ',' << result.log_residual[i] << ',' << result.log_solution[i] << ','
        << result.curvature[i] << '\n';
  }
}

}  // namespace deblur
