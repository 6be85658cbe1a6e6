#include "doctest.h"
#include "support.hpp"

#include "deblur/convolution.hpp"
#include "deblur/image.hpp"
#include "deblur/io.hpp"
#include "deblur/noise.hpp"
#include "deblur/psf.hpp"

#include <fstream>
#include <sstream>

using namespace deblur;

namespace {

constexpr BoundaryCondition kAllBc[] = {BoundaryCondition::zero, BoundaryCondition::periodic,
                                        BoundaryCondition::reflexive};

}  // namespace

TEST_CASE("vectorize stacks columns") {
  Grid x(2, 2);
  x << 1, 2, 3, 4;
  const Vector v = vectorize(x);
  CHECK(v == Vector{{1.0, 3.0, 2.0, 4.0}});
  CHECK(unvectorize(v, 2, 2) == x);

  Grid one(1, 1);
  one << 7.5;
  CHECK(vectorize(one) == Vector::Constant(1, 7.5));
  CHECK_THROWS_AS(unvectorize(v, 3, 2), std::invalid_argument);
}

TEST_CASE("boundary names round trip") {
  for (auto bc : kAllBc) CHECK(parse_boundary(to_string(bc)) == bc);
  CHECK_THROWS_AS(parse_boundary("mirror"), std::invalid_argument);
}

TEST_CASE("image shape checks") {
  CHECK_THROWS_AS(Image(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(Image(3, 3, 2), std::invalid_argument);
  CHECK_THROWS_AS(Image(std::vector<Grid>{Grid::Zero(2, 2), Grid::Zero(2, 3), Grid::Zero(2, 2)}),
                  std::invalid_argument);
  const Image rgb(4, 5, 3);
  CHECK(rgb.pixel_count() == 60);
}

TEST_CASE("pad") {
  std::mt19937_64 rng(3);
  const Grid x = testing::random_grid(4, 5, rng);
  for (auto bc : kAllBc) CHECK(pad(x, bc, 0) == x);

  SUBCASE("zero border") {
    Grid row(1, 3);
    row << 1, 2, 3;
    Grid expect = Grid::Zero(3, 5);
    expect.block(1, 1, 1, 3) = row;
    CHECK(pad(row, BoundaryCondition::zero, 1) == expect);
  }
  SUBCASE("periodic equals cropped tiling") {
    Grid small(2, 2);
    small << 1, 2, 3, 4;
    const Grid tiled = small.replicate(3, 3);
    CHECK(pad(small, BoundaryCondition::periodic, 2) == tiled);
    const Grid wide = pad(x, BoundaryCondition::periodic, 3);
    CHECK(wide == x.replicate(3, 3).block(1, 2, 10, 11));
  }
  SUBCASE("reflexive duplicates the edge") {
    Grid row(1, 3);
    row << 1, 2, 3;
    const Grid p = pad(row.replicate(3, 1), BoundaryCondition::reflexive, 2);
    CHECK(p.row(2) == Eigen::RowVectorXd{{2, 1, 1, 2, 3, 3, 2}});
    CHECK_THROWS_AS(pad(x, BoundaryCondition::reflexive, 4), std::invalid_argument);
  }
  SUBCASE("matches the oracle extension") {
    for (auto bc : kAllBc) {
      const Grid p = pad(x, bc, 3);
      for (Index i = -3; i < 7; ++i)
        for (Index j = -3; j < 8; ++j) {
          const Index si = testing::extend(i, 4, bc), sj = testing::extend(j, 5, bc);
          const double v = (si < 0 || sj < 0) ? 0.0 : x(si, sj);
          CHECK(p(i + 3, j + 3) == v);
        }
    }
  }
}

TEST_CASE("point source reproduces the mirrored psf") {
  std::mt19937_64 rng(11);
  const Psf psf = testing::random_psf(5, rng);
  Grid x = Grid::Zero(12, 13);
  const Index p = 6, q = 5;
  x(p, q) = 1.0;
  const Grid g = convolve2d(x, psf, BoundaryCondition::zero);
  for (Index i = 0; i < 12; ++i)
    for (Index j = 0; j < 13; ++j) {
      const Index a = i - p + 2, b = j - q + 2;
      const double expect = (a >= 0 && a < 5 && b >= 0 && b < 5) ? psf(a, b) : 0.0;
      CHECK(std::abs(g(i, j) - expect) <= 1e-14);
    }
}

TEST_CASE("convolution matches a direct oracle") {
  std::mt19937_64 rng(5);
  for (auto bc : kAllBc) {
    CAPTURE(to_string(bc));
    const Grid x = testing::random_grid(8, 8, rng);
    const Psf psf = testing::random_psf(3, rng);
    CHECK((convolve2d(x, psf, bc) - testing::convolution_oracle(x, psf.weights(), bc)).cwiseAbs().maxCoeff() <
          1e-12);
    const Grid y = testing::random_grid(9, 7, rng);
    const Psf big = testing::random_psf(7, rng);
    CHECK((convolve2d(y, big, bc) - testing::convolution_oracle(y, big.weights(), bc)).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK((serial::convolve2d(y, big, bc) - convolve2d(y, big, bc)).cwiseAbs().maxCoeff() < 1e-14);
  }
  const Grid x = testing::random_grid(6, 6, rng);
  CHECK(convolve2d(x, Psf::delta(1), BoundaryCondition::zero) == x);
  CHECK(convolve2d(x, Psf::delta(5), BoundaryCondition::periodic) == x);
  CHECK_THROWS_AS(convolve2d(x, Psf::delta(7), BoundaryCondition::zero), std::invalid_argument);
}

TEST_CASE("convolution is linear and conserves mass under periodic extension") {
  std::mt19937_64 rng(8);
  const Psf psf = testing::random_psf(5, rng);
  const Grid a = testing::random_grid(10, 9, rng);
  const Grid b = testing::random_grid(10, 9, rng);
  for (auto bc : kAllBc) {
    const Grid lhs = convolve2d(Grid(2.0 * a - 3.0 * b), psf, bc);
    const Grid rhs = 2.0 * convolve2d(a, psf, bc) - 3.0 * convolve2d(b, psf, bc);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(convolve2d(a, psf, BoundaryCondition::periodic).sum() == doctest::Approx(a.sum()).epsilon(1e-13));
  // A constant image is left unchanged by the mirror and wrap rules.
  const Grid c = Grid::Constant(10, 9, 0.4);
  CHECK((convolve2d(c, psf, BoundaryCondition::reflexive) - c).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("adjoint and psf gradient") {
  std::mt19937_64 rng(21);
  for (auto bc : kAllBc) {
    CAPTURE(to_string(bc));
    const Psf psf = testing::random_psf(5, rng);
    const Grid x = testing::random_grid(9, 11, rng);
    const Grid r = testing::random_grid(9, 11, rng, -1, 1);
    const double lhs = (convolve2d(x, psf, bc).array() * r.array()).sum();
    const double rhs = (x.array() * convolve2d_adjoint(r, psf, bc).array()).sum();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    CHECK((serial::convolve2d_adjoint(r, psf, bc) - convolve2d_adjoint(r, psf, bc)).cwiseAbs().maxCoeff() < 1e-13);

    // <r, x * h> is linear in the taps; its gradient is read off unit taps.
    const Grid g = psf_gradient(x, r, 5, bc);
    CHECK((serial::psf_gradient(x, r, 5, bc) - g).cwiseAbs().maxCoeff() < 1e-12);
    for (Index a = 0; a < 5; ++a)
      for (Index b = 0; b < 5; ++b) {
        Grid unit = Grid::Zero(5, 5);
        unit(a, b) = 1.0;
        const double direct = (convolve2d_taps(x, unit, bc).array() * r.array()).sum();
        CHECK(g(a, b) == doctest::Approx(direct).epsilon(1e-12));
      }
  }
}

TEST_CASE("separable psf convolves as two passes") {
  std::mt19937_64 rng(2);
  const Vector col = testing::random_kernel(5, rng);
  const Vector row = testing::random_kernel(5, rng);
  const Psf psf = Psf::from_weights(col * row.transpose());
  const Psf col_only = Psf::from_weights([&] {
    Grid g = Grid::Zero(5, 5);
    g.col(2) = col;
    return g;
  }());
  const Psf row_only = Psf::from_weights([&] {
    Grid g = Grid::Zero(5, 5);
    g.row(2) = row.transpose();
    return g;
  }());
  const Grid x = testing::random_grid(12, 10, rng);
  for (auto bc : kAllBc) {
    const Grid two_pass = convolve2d(convolve2d(x, col_only, bc), row_only, bc);
    CHECK((convolve2d(x, psf, bc) - two_pass).cwiseAbs().maxCoeff() < 1e-12);
  }
  const auto factors = separable_factors(psf);
  REQUIRE(factors.has_value());
  CHECK((factors->first - col).norm() < 1e-10);
  CHECK((factors->second - row).norm() < 1e-10);
  CHECK_FALSE(separable_factors(motion_psf(7, 40, 3)).has_value());
}

TEST_CASE("psf construction") {
  CHECK_THROWS_AS(Psf::from_weights(Grid::Ones(4, 4)), std::invalid_argument);
  CHECK_THROWS_AS(Psf::from_weights(Grid::Constant(3, 3, -1.0)), std::invalid_argument);
  CHECK_THROWS_AS(Psf::from_weights(Grid::Zero(3, 3)), std::invalid_argument);
  const Psf p = Psf::from_weights(Grid::Constant(3, 3, 2.0));
  CHECK(p.weights().sum() == doctest::Approx(1.0));
  CHECK(p.center() == 1);
}

TEST_CASE("gaussian psf") {
  const Psf iso = gaussian_psf(13, 2.3, 2.3, 0.0);
  CHECK(iso.size() == 13);
  CHECK(iso.weights().sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(is_doubly_symmetric(iso));
  const Grid w = iso.weights();
  CHECK((w - w.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((w - w.colwise().reverse()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((w - w.rowwise().reverse()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(w.maxCoeff() == w(6, 6));

  const Psf tall = gaussian_psf(9, 2.0, 0.7, 0.0);
  CHECK(tall(0, 4) > tall(4, 0));  // wider down the rows
  const Psf tilted = gaussian_psf(9, 1.5, 1.5, 1.0);
  CHECK_FALSE(is_doubly_symmetric(tilted));
  CHECK(tilted(2, 2) > tilted(2, 6));

  CHECK_THROWS_AS(gaussian_psf(8, 1, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_psf(7, 1, 1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_psf(7, 0, 1, 0), std::invalid_argument);
}

TEST_CASE("gaussian sigma for kernel size") {
  CHECK(gaussian_sigma_for_kernel(13) == 2.3);
  CHECK(gaussian_sigma_for_kernel(3) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(gaussian_sigma_for_kernel(7) == doctest::Approx(1.4).epsilon(1e-15));
}

TEST_CASE("motion psf") {
  const Psf d = motion_psf(7, 1, 42);
  CHECK(d.weights() == Psf::delta(7).weights());
  const Psf a = motion_psf(9, 30, 7);
  const Psf b = motion_psf(9, 30, 7);
  CHECK(a.weights() == b.weights());
  CHECK(a.weights().sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a.weights().minCoeff() >= 0.0);
  CHECK(a.weights() != motion_psf(9, 30, 8).weights());
  CHECK_THROWS_AS(motion_psf(6, 3, 1), std::invalid_argument);
  CHECK_THROWS_AS(motion_psf(7, 0, 1), std::invalid_argument);
}

TEST_CASE("noise") {
  std::mt19937_64 rng(4);
  const Grid x = testing::random_grid(20, 20, rng);
  const NoisyGrid none = add_noise(x, NoiseSpec::std_dev(0.0, 1));
  CHECK(none.noise.cwiseAbs().maxCoeff() == 0.0);
  CHECK(none.observed == x);

  const NoisyGrid frob = add_noise(x, NoiseSpec::frobenius(0.005, 9));
  CHECK(std::abs(frob.noise.norm() - 0.005) < 1e-12);
  CHECK((frob.observed - x - frob.noise).cwiseAbs().maxCoeff() < 1e-15);

  const NoisyGrid again = add_noise(x, NoiseSpec::frobenius(0.005, 9));
  CHECK(again.observed == frob.observed);

  const Grid big = Grid::Zero(200, 200);
  const NoisyGrid sd = add_noise(big, NoiseSpec::std_dev(0.1, 3));
  const double est = std::sqrt(sd.noise.squaredNorm() / 40000.0);
  CHECK(est == doctest::Approx(0.1).epsilon(0.02));
  CHECK(std::abs(sd.noise.mean()) < 0.003);

  const Image rgb(std::vector<Grid>{x, x, x});
  const NoisyImage ni = add_noise(rgb, NoiseSpec::std_dev(0.05, 1));
  CHECK(ni.noise.channel(0) != ni.noise.channel(1));
  CHECK_THROWS_AS(NoiseSpec::std_dev(-1, 1), std::invalid_argument);
}

TEST_CASE("netpbm and csv round trips") {
  const auto dir = testing::scratch_dir("io");
  Grid g(3, 4);
  g << 0, 0.2, 0.4, 0.6, 1, 0.8, 0.5, 0.1, 0.3, 0.3, 0.9, 0.7;
  const Grid q = (g * 255.0).array().round() / 255.0;

  for (auto enc : {io::NetpbmEncoding::ascii, io::NetpbmEncoding::binary}) {
    const auto path = dir / (enc == io::NetpbmEncoding::ascii ? "a.pgm" : "b.pgm");
    io::write_netpbm(path, Image(g), {enc, 255});
    io::NetpbmInfo info;
    const Image back = io::read_netpbm(path, &info);
    CHECK(info.encoding == enc);
    CHECK((back.channel(0) - q).cwiseAbs().maxCoeff() < 1e-15);
  }
  {
    const auto path = dir / "deep.pgm";
    io::write_netpbm(path, Image(g), {io::NetpbmEncoding::binary, 65535});
    io::NetpbmInfo info;
    const Image back = io::read_netpbm(path, &info);
    CHECK(info.maxval == 65535);
    CHECK((back.channel(0) - g).cwiseAbs().maxCoeff() < 1e-5);
  }
  {
    const Image rgb(std::vector<Grid>{q, Grid(q.reverse()), Grid(Grid::Constant(3, 4, 1.0))});
    const auto path = dir / "c.ppm";
    io::write_netpbm(path, rgb);
    const Image back = io::read_netpbm(path);
    REQUIRE(back.channel_count() == 3);
    for (int c = 0; c < 3; ++c) CHECK((back.channel(c) - rgb.channel(c)).cwiseAbs().maxCoeff() < 1e-15);
  }
  {
    Grid out = g;
    out(0, 0) = -0.5;
    out(1, 0) = 3.0;
    std::ostringstream s;
    io::format_netpbm(s, Image(out), {io::NetpbmEncoding::ascii, 255});
    std::istringstream in(s.str());
    const Image back = io::parse_netpbm(in);
    CHECK(back.channel(0)(0, 0) == 0.0);
    CHECK(back.channel(0)(1, 0) == 1.0);
  }
  {
    std::istringstream comment("P2\n# a comment\n2 1\n255\n0 255\n");
    const Image back = io::parse_netpbm(comment);
    CHECK(back.channel(0)(0, 1) == 1.0);
    std::istringstream bad("P7\n1 1\n255\n0\n");
    CHECK_THROWS(io::parse_netpbm(bad));
    std::istringstream short_data("P2\n2 2\n255\n0 1 2\n");
    CHECK_THROWS(io::parse_netpbm(short_data));
  }
  {
    const auto path = dir / "g.csv";
    const Grid raw = g * 7.0 - Grid::Constant(3, 4, 2.0);
    io::write_csv_grid(path, raw);
    CHECK(io::read_csv_grid(path) == raw);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "3,4");
    const Image via = io::read_image(path);
    CHECK(via.channel(0) == raw);
  }
  {
    const auto path = dir / "k.csv";
    const Psf psf = gaussian_psf(5, 1.0, 1.0, 0.0);
    io::write_psf_csv(path, psf);
    CHECK((io::read_psf_csv(path).weights() - psf.weights()).cwiseAbs().maxCoeff() < 1e-16);
  }
  CHECK_THROWS(io::read_netpbm(dir / "missing.pgm"));
}
