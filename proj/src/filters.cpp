#include "deblur/filters.hpp"

#include <cmath>
#include <iomanip>
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

Index nonzero_count(const Vector& sigma) {
  Index k = 0;
  while (k < sigma.size() && sigma(k) > 0.0) ++k;
  return k;
}

}  // namespace

Vector filter_factors(const FilterSpec& spec, const Vector& sigma) {
  const Index n = sigma.size();
  return std::visit(
      overloaded{
          [&](const Tsvd& t) -> Vector {
            if (t.truncation < 1 || t.truncation > n)
              throw std::invalid_argument("TSVD truncation " + std::to_string(t.truncation) + " outside [1, " +
                                          std::to_string(n) + "]");
            const Index k = std::min(t.truncation, nonzero_count(sigma));
            Vector phi = Vector::Zero(n);
            phi.head(k).setOnes();
            return phi;
          },
          [&](const Tikhonov& t) -> Vector {
            if (!(t.alpha > 0.0)) throw std::invalid_argument("Tikhonov alpha must be > 0");
            const double a2 = t.alpha * t.alpha;
            return sigma.array().square() / (sigma.array().square() + a2);
          },
          [&](const CustomFilter& c) -> Vector {
            if (c.phi.size() != n) throw std::invalid_argument("custom filter length does not match N");
            if ((c.phi.array() < 0.0).any() || (c.phi.array() > 1.0).any() || !c.phi.allFinite())
              throw std::invalid_argument("custom filter factors must lie in [0, 1]");
            return c.phi;
          },
      },
      spec);
}

Vector filtered_reconstruct(const SvdTriple& svd, const Vector& coefficients, const Vector& phi) {
  const Vector& sigma = svd.singular_values();
  Vector w(sigma.size());
  for (Index i = 0; i < sigma.size(); ++i) {
    if (phi(i) == 0.0) {
      w(i) = 0.0;
    } else if (sigma(i) == 0.0) {
      throw std::domain_error("filtered_reconstruct: nonzero filter factor at zero singular value (index " +
                              std::to_string(i + 1) + ")");
    } else {
      w(i) = phi(i) * coefficients(i) / sigma(i);
    }
  }
  return svd.synthesize(w);
}

Vector filtered_reconstruct(const SvdTriple& svd, const Vector& b, const FilterSpec& spec) {
  const Vector phi = filter_factors(spec, svd.singular_values());
  return filtered_reconstruct(svd, svd.coefficients(b), phi);
}

SolutionNorms residual_and_solution_norms(const Vector& sigma, const Vector& coefficients, double b_norm_sq,
                                          const Vector& phi) {
  double res = 0.0;
  double sol = 0.0;
  double captured = 0.0;
  for (Index i = 0; i < sigma.size(); ++i) {
    const double c = coefficients(i);
    captured += c * c;
    const double r = (1.0 - phi(i)) * c;
    res += r * r;
    if (phi(i) != 0.0) {
      if (sigma(i) == 0.0) throw std::domain_error("solution norm: nonzero filter factor at zero singular value");
      const double s = phi(i) * c / sigma(i);
      sol += s * s;
    }
  }
  // Component of b outside range(U); zero for square orthogonal U, where the
  // difference is pure cancellation and is dropped.
  const double outside = b_norm_sq - captured;
  if (outside > 1e-10 * b_norm_sq) res += outside;
  return {std::sqrt(res), std::sqrt(sol)};
}

SolutionNorms residual_and_solution_norms(const SvdTriple& svd, const Vector& b, const FilterSpec& spec) {
  const Vector& sigma = svd.singular_values();
  const Vector phi = filter_factors(spec, sigma);
  const Vector c = svd.coefficients(b);
  // For square orthogonal U the outside component is pure rounding; skip it.
  return residual_and_solution_norms(sigma, c, c.squaredNorm(), phi);
}

ErrorSplit error_decomposition(const SvdTriple& svd, const FilterSpec& spec, const Vector& x_true, const Vector& e) {
  const Vector& sigma = svd.singular_values();
  const Vector phi = filter_factors(spec, sigma);
  const Index n = sigma.size();

  const Vector b_exact = svd.apply(x_true);
  const Vector c_exact = svd.coefficients(b_exact);
  const Vector c_noise = svd.coefficients(e);
  const Vector vx = svd.right_coefficients(x_true);

  ErrorSplit out;
  out.x_filtered = filtered_reconstruct(svd, svd.coefficients(b_exact + e), phi);
  out.regularization_error = svd.synthesize((Vector::Ones(n) - phi).cwiseProduct(vx));

  Vector w(n);
  double pert = 0.0;
  double reg = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (phi(i) == 0.0) {
      w(i) = 0.0;
    } else {
      w(i) = phi(i) * c_noise(i) / sigma(i);
    }
    pert += w(i) * w(i);
    // u_i^T b_exact / sigma_i = v_i^T x_true; at sigma_i = 0 only the latter is defined.
    const double xi = sigma(i) > 0.0 ? c_exact(i) / sigma(i) : vx(i);
    const double r = (1.0 - phi(i)) * xi;
    reg += r * r;
  }
  out.perturbation_error = svd.synthesize(w);
  out.regularization_norm = out.regularization_error.norm();
  out.perturbation_norm = out.perturbation_error.norm();
  out.regularization_norm_sq_closed = reg;
  out.perturbation_norm_sq_closed = pert;
  return out;
}

void write_filter_csv(std::ostream& out, const Vector& sigma, const Vector& phi) {
  out << "i,sigma,phi\n" << std::setprecision(17);
  for (Index i = 0; i < sigma.size(); ++i) out << (i + 1) << ',' << sigma(i) << ',' << phi(i) << '\n';
}

}  // namespace deblur
