#include "doctest.h"
#include "support.hpp"

#include "deblur/convolution.hpp"
#include "deblur/filters.hpp"
#include "deblur/linear_operator.hpp"
#include "deblur/noise.hpp"
#include "deblur/operator.hpp"
#include "deblur/spectral.hpp"
#include "deblur/variational.hpp"

#include <cmath>
#include <sstream>

using namespace deblur;

namespace {

Vector central_difference(const RegularizerSpec& spec, const Vector& x, Index m, Index n, double h) {
  Vector g(x.size());
  Vector probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + h;
    const double up = regularizer_value(spec, probe, m, n);
    probe(i) = x(i) - h;
    const double down = regularizer_value(spec, probe, m, n);
    probe(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

struct Problem {
  SeparableBlur blur;
  DenseOperator a;
  SvdTriple svd;
  Vector b;
};

Problem gaussian_problem(Index n, std::uint64_t seed) {
  SeparableBlur blur = build_separable(gaussian_psf(5, 1.0, 1.0, 0.0), n, n, BoundaryCondition::reflexive);
  DenseOperator a = assemble_dense(blur);
  SvdTriple svd = svd_separable(blur);
  const Vector b = a.matrix * vectorize(testing::smooth_image(n, n)) + gaussian_vector(n * n, 1e-3, seed);
  return {std::move(blur), std::move(a), std::move(svd), b};
}

}  // namespace

TEST_CASE("p-norm powers") {
  const Vector y1{{1.0, 2.0, 3.0, 4.0}};
  const Vector y2{{1.0, 0.2, 3.0, 4.0}};
  const Vector y3{{1.0, 0.2, 0.3, 4.0}};
  const double ps[] = {1.0, 1.2, 1.4, 1.7, 2.0};
  const double table[3][5] = {{10.0, 12.31, 15.26, 21.28, 30.0},
                              {8.2, 10.16, 12.73, 18.09, 26.04},
                              {5.5, 6.66, 8.25, 11.75, 17.13}};
  const Vector* ys[] = {&y1, &y2, &y3};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 5; ++c) {
      CAPTURE(r);
      CAPTURE(ps[c]);
      CHECK(std::abs(p_norm_pow(*ys[r], ps[c]) - table[r][c]) <= 0.005);
    }
  CHECK(p_norm_pow(y1, 1.0) == 10.0);
  CHECK(p_norm_pow(y1, 2.0) == 30.0);
  CHECK(p_norm_pow(-y1, 1.0) == 10.0);
  CHECK_THROWS_AS(p_norm_pow(y1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(p_norm_pow(y1, 2.5), std::invalid_argument);
}

TEST_CASE("regularizer validation and names") {
  CHECK(name(SmoothNorm{}) == "smooth");
  CHECK_NOTHROW(validate(PNorm{}));
  CHECK_THROWS_AS(validate(PNorm{Difference::identity, 2.0, 1e-3}), std::invalid_argument);
  CHECK_THROWS_AS(validate(PNorm{Difference::identity, 1.5, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(SparseEdge{1.5}), std::invalid_argument);
  CHECK_THROWS_AS(validate(SparseEdge{0.7, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(ZeroCount{Difference::identity, -1.0}), std::invalid_argument);
}

TEST_CASE("difference operators") {
  std::mt19937_64 rng(1);
  const Index m = 5, n = 4;
  const Vector x = testing::random_vector(20, rng);
  const Grid g = unvectorize(x, m, n);
  const Vector dx = apply_difference(Difference::first_difference, x, m, n);
  REQUIRE(dx.size() == 40);
  CHECK(dx(0) == doctest::Approx(g(1, 0) - g(0, 0)));
  CHECK(dx(m - 1) == 0.0);  // last row has no forward neighbour
  CHECK(dx(20) == doctest::Approx(g(0, 1) - g(0, 0)));
  CHECK(dx.tail(m).isZero());

  const Vector y = testing::random_vector(40, rng);
  CHECK(dx.dot(y) == doctest::Approx(x.dot(apply_difference_adjoint(Difference::first_difference, y, m, n))));
  const Eigen::MatrixXd d = difference_matrix(Difference::first_difference, m, n);
  CHECK((d * x - dx).norm() < 1e-14);
  CHECK(difference_matrix(Difference::identity, m, n) == Eigen::MatrixXd::Identity(20, 20));
  CHECK(apply_difference(Difference::identity, x, m, n) == x);
  CHECK_THROWS_AS(apply_difference(Difference::identity, x, 3, 3), std::invalid_argument);

  const Vector f = edge_magnitude(Vector::Constant(20, 0.3), m, n);
  CHECK((f.array() - kEdgeSmoothing).abs().maxCoeff() < 1e-20);
}

TEST_CASE("regularizer values") {
  std::mt19937_64 rng(2);
  const Vector x = testing::random_vector(30, rng);
  const ValueAndGradient s = regularizer_value_and_gradient(SmoothNorm{}, x, 5, 6);
  CHECK(s.value == doctest::Approx(x.squaredNorm()));
  CHECK((s.gradient - 2.0 * x).norm() < 1e-14);

  // Constant image: every gradient magnitude is the inner smoothing term.
  const SparseEdge prior{};
  const double flat = regularizer_value(prior, Vector::Constant(30, 0.4), 5, 6);
  CHECK(flat == doctest::Approx(30.0 * std::pow(prior.epsilon, prior.q)).epsilon(1e-5));
  CHECK(flat == doctest::Approx(30.0 * std::pow(prior.epsilon + kEdgeSmoothing, prior.q)).epsilon(1e-14));

  const ZeroCount zc{Difference::identity, 0.5};
  Vector v = Vector::Zero(30);
  v.head(4).setConstant(0.9);
  v(5) = -0.7;
  CHECK(regularizer_value(zc, v, 5, 6) == 5.0);
  CHECK_THROWS_AS(regularizer_value_and_gradient(zc, v, 5, 6), std::logic_error);
  try {
    (void)regularizer_value_and_gradient(zc, v, 5, 6);
  } catch (const std::logic_error& e) {
    CHECK(std::string(e.what()).find("evaluation-only") != std::string::npos);
  }

  const PNorm p{Difference::identity, 1.3, 1e-3};
  CHECK(regularizer_value(p, x, 5, 6) ==
        doctest::Approx((x.array().square() + 1e-6).pow(0.65).sum()).epsilon(1e-14));
}

TEST_CASE("regularizer gradients match central differences") {
  std::mt19937_64 rng(3);
  const RegularizerSpec specs[] = {SmoothNorm{Difference::identity}, SmoothNorm{Difference::first_difference},
                                   PNorm{Difference::identity, 1.2, 1e-2}, PNorm{Difference::first_difference, 1.5, 1e-2},
                                   SparseEdge{}};
  for (const auto& spec : specs) {
    CAPTURE(name(spec));
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Vector x = testing::random_vector(42, rng, 0, 1);
      const Vector g = regularizer_value_and_gradient(spec, x, 6, 7).gradient;
      const Vector fd = central_difference(spec, x, 6, 7, 1e-6);
      worst = std::max(worst, (g - fd).norm() / g.norm());
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("stacked least squares") {
  const Problem p = gaussian_problem(8, 1);
  for (double alpha : {1e-3, 0.05, 0.5}) {
    const Vector x = tikhonov_stacked_solve(p.a, p.b, alpha);
    CHECK(testing::relative_error(x, filtered_reconstruct(p.svd, p.b, Tikhonov{alpha})) < 1e-8);

    const Eigen::MatrixXd d = difference_matrix(Difference::first_difference, 8, 8);
    const Eigen::MatrixXd& a = p.a.matrix;
    const Vector ref = (a.transpose() * a + alpha * alpha * d.transpose() * d).ldlt().solve(a.transpose() * p.b);
    CHECK(testing::relative_error(tikhonov_stacked_solve(p.a, p.b, alpha, Difference::first_difference), ref) <
          1e-7);
  }
  const Vector naive = p.a.matrix.partialPivLu().solve(p.b);
  CHECK(tikhonov_stacked_solve(p.a, p.b, 1e6 * p.svd.singular_values()(0)).norm() < 1e-4 * naive.norm());
  CHECK(tikhonov_stacked_solve(p.a, Vector::Zero(64), 0.1).norm() == 0.0);
  CHECK_THROWS_AS(tikhonov_stacked_solve(p.a, p.b, 0.0), std::invalid_argument);
}

TEST_CASE("gradient descent") {
  const Problem p = gaussian_problem(8, 2);
  const LinearOperator op = LinearOperator::from_separable(p.blur);
  const double s1 = p.svd.singular_values()(0);

  SUBCASE("converges to the Tikhonov solution") {
    for (double alpha : {0.1, 0.3}) {
      GdConfig cfg;
      cfg.lambda = alpha * alpha;
      cfg.step = 0.9 / (s1 * s1 + cfg.lambda);
      cfg.max_iterations = 100000;
      cfg.relative_tolerance = 0.0;
      cfg.gradient_tolerance = 1e-10;
      const GdResult r = gradient_reconstruct(op, p.b, SmoothNorm{}, cfg);
      CHECK(r.converged);
      CHECK(testing::relative_error(r.x, filtered_reconstruct(p.svd, p.b, Tikhonov{alpha})) < 1e-3);
      for (std::size_t i = 1; i < r.trace.size(); ++i)
        CHECK(r.trace[i].objective <= r.trace[i - 1].objective * (1.0 + 1e-14));
    }
  }
  SUBCASE("unregularized least squares") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(16, 16);
    a.diagonal() = Vector::LinSpaced(16, 1.0, 0.5);
    const LinearOperator well = LinearOperator::from_dense(make_dense(a, 4, 4));
    const Vector b = Vector::LinSpaced(16, -1.0, 1.0);
    GdConfig cfg;
    cfg.lambda = 0.0;
    cfg.step = 0.45;
    cfg.relative_tolerance = 0.0;
    cfg.gradient_tolerance = 1e-12;
    cfg.max_iterations = 10000;
    const GdResult r = gradient_reconstruct(well, b, SmoothNorm{}, cfg);
    CHECK((r.x - a.diagonal().cwiseInverse().cwiseProduct(b)).norm() < 1e-10);
  }
  SUBCASE("smooth nonquadratic priors descend") {
    for (const RegularizerSpec& reg : {RegularizerSpec{PNorm{}}, RegularizerSpec{SparseEdge{}}}) {
      GdConfig cfg;
      cfg.lambda = 1e-4;
      cfg.step = 0.2;
      cfg.max_iterations = 300;
      const GdResult r = gradient_reconstruct(op, p.b, reg, cfg);
      CHECK(r.trace.back().objective < r.trace.front().objective);
      CHECK(r.trace.front().iteration == 0);
    }
  }
  SUBCASE("divergence") {
    GdConfig cfg;
    cfg.step = 5.0;
    try {
      (void)gradient_reconstruct(op, p.b, SmoothNorm{}, cfg);
      FAIL("expected divergence");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("step size too large") != std::string::npos);
    }
  }
  SUBCASE("inputs") {
    GdConfig cfg;
    CHECK_THROWS_AS(gradient_reconstruct(op, p.b, ZeroCount{}, cfg), std::invalid_argument);
    cfg.init = GdConfig::Init::provided;
    CHECK_THROWS_AS(gradient_reconstruct(op, p.b, SmoothNorm{}, cfg), std::invalid_argument);
    cfg.start = Vector::Zero(64);
    cfg.max_iterations = 1;
    const GdResult r = gradient_reconstruct(op, p.b, SmoothNorm{}, cfg);
    CHECK(r.trace.size() == 2);
    CHECK(r.trace[0].objective == doctest::Approx(p.b.squaredNorm()));
  }
  SUBCASE("trace csv") {
    std::ostringstream out;
    write_trace_csv(out, {TraceEntry{0, 1.5, 1.0, 0.25}});
    CHECK(out.str() == "iteration,objective,residual_norm,reg_value\n0,1.5,1,0.25\n");
  }
}

TEST_CASE("lambda schedule") {
  const auto s = lambda_schedule(2.0, 1.5, 6);
  REQUIRE(s.size() == 6);
  for (int i = 0; i < 6; ++i) CHECK(s[static_cast<std::size_t>(i)] == 2.0 / std::pow(1.5, i));
  CHECK(s[1] == doctest::Approx(4.0 / 3.0));
  CHECK(s[2] == doctest::Approx(8.0 / 9.0));
  const auto floored = lambda_schedule(2.0, 3.0, 5, 0.1);
  CHECK(floored.back() == 0.1);
  CHECK(floored[2] == doctest::Approx(2.0 / 9.0));
  CHECK_THROWS_AS(lambda_schedule(2.0, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(lambda_schedule(0.0, 1.5, 3), std::invalid_argument);
}

TEST_CASE("blind deblurring") {
  SUBCASE("a sharp noise-free observation is a fixed point") {
    const Grid y = testing::blocky_image(24, 24, 3);
    MapConfig cfg;
    cfg.kernel_size = 5;
    cfg.lambda_start = 1e-12;
    cfg.levels = 2;
    cfg.iterations_per_level = 3;
    const MapResult r = map_blind_deblur(y, cfg);
    CHECK((r.kernel.weights() - Psf::delta(5).weights()).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((r.x - y).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("objective never rises within a stage") {
    const Grid x = testing::blocky_image(32, 32, 5);
    const Grid y = convolve2d(x, motion_psf(5, 8, 2), BoundaryCondition::reflexive);
    MapConfig cfg;
    cfg.kernel_size = 5;
    cfg.levels = 3;
    cfg.iterations_per_level = 4;
    cfg.x_inner = 5;
    cfg.h_inner = 50;
    const MapResult r = map_blind_deblur(y, cfg);
    REQUIRE(r.stages.size() == 3);
    CHECK(r.stages[1].lambda == doctest::Approx(2.0 / 1.5));
    for (const auto& st : r.stages) {
      CHECK(st.objective.size() == 5);
      for (std::size_t i = 1; i < st.objective.size(); ++i) CHECK(st.objective[i] <= st.objective[i - 1]);
    }
    CHECK(r.kernel.weights().minCoeff() >= 0.0);
    CHECK(r.kernel.weights().sum() == doctest::Approx(1.0).epsilon(1e-12));
    const double last = r.stages.back().objective.back();
    CHECK(last == doctest::Approx(map_objective(y, r.x, r.kernel.weights(), r.stages.back().lambda, cfg.prior,
                                                cfg.bc)).epsilon(1e-12));
  }
  SUBCASE("inputs") {
    MapConfig cfg;
    CHECK_THROWS_AS(map_blind_deblur(Grid::Zero(5, 5), cfg), std::invalid_argument);
    Grid bad = Grid::Zero(16, 16);
    bad(3, 3) = std::nan("");
    CHECK_THROWS_AS(map_blind_deblur(bad, cfg), std::invalid_argument);
    cfg.kernel_size = 4;
    CHECK_THROWS_AS(map_blind_deblur(Grid::Zero(16, 16), cfg), std::invalid_argument);
  }
}

TEST_CASE("map objective") {
  std::mt19937_64 rng(4);
  const Grid x = testing::random_grid(10, 10, rng);
  const Grid y = testing::random_grid(10, 10, rng);
  const Psf h = testing::random_psf(3, rng);
  const SparseEdge prior{};
  const double expect = 0.5 * (convolve2d(x, h, BoundaryCondition::zero) - y).squaredNorm() +
                        0.3 * regularizer_value(prior, vectorize(x), 10, 10);
  CHECK(map_objective(y, x, h.weights(), 0.3, prior, BoundaryCondition::zero) == doctest::Approx(expect));
}

TEST_CASE("kernel similarity") {
  const Psf a = motion_psf(7, 12, 3);
  CHECK(kernel_similarity(a, a) == doctest::Approx(1.0));
  Grid shifted = Grid::Zero(7, 7);
  shifted.block(0, 1, 6, 6) = a.weights().block(1, 0, 6, 6);
  if (shifted.sum() > 0.0 && (a.weights().row(0).sum() + a.weights().col(6).sum()) == 0.0)
    CHECK(kernel_similarity(a, Psf::from_weights(shifted)) == doctest::Approx(1.0));
  CHECK(kernel_similarity(a, Psf::delta(7)) < 0.9);
  const Psf small = Psf::delta(3);
  CHECK(kernel_similarity(Psf::delta(7), small) == doctest::Approx(1.0));
  CHECK(kernel_similarity(gaussian_psf(7, 1, 1, 0), gaussian_psf(7, 1, 1, 0)) == doctest::Approx(1.0));
}
