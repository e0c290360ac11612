#include "algshape/errors.hpp"
#include "algshape/shapegen.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace algshape;

TEST(Shapegen, BoundedQuarticIsAdmissible) {
  const ImagePlane plane{11.0, 1.0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const BivariatePolynomial p = gen_bounded_quartic(seed, plane);
    EXPECT_EQ(p.degree(), 4);
    EXPECT_GT(leading_form_min(p), 0.0);
    EXPECT_NE(p.coeff(0, 0), 0.0);
    const Raster r = render_shape(p, plane, 8);
    EXPECT_GT(r.count(), 0u);
    EXPECT_LE(count_components(r), 4);
    // Inside the disk of radius 0.6 L.
    for (int row = 0; row < r.height; ++row) {
      for (int c = 0; c < r.width; ++c) {
        if (r.at(row, c)) EXPECT_LE(std::hypot(r.x_center(c), r.y_center(row)), 0.6 * 11.0 + 0.1);
      }
    }
  }
}

TEST(Shapegen, SeedDeterminism) {
  const ImagePlane plane{11.0, 1.0};
  EXPECT_EQ(gen_bounded_quartic(5, plane).coeffs(), gen_bounded_quartic(5, plane).coeffs());
  EXPECT_NE(gen_bounded_quartic(5, plane).coeffs(), gen_bounded_quartic(6, plane).coeffs());
  const ImagePlane big{18.0, 1.0};
  EXPECT_EQ(gen_unbounded_quartic(2, big).coeffs(), gen_unbounded_quartic(2, big).coeffs());
}

TEST(Shapegen, ConicArea) {
  const BivariatePolynomial e = gen_conic({0.5, -0.25}, {2.0, 1.0}, 0.6);
  const Raster r = render_shape(e, ImagePlane{3.0, 1.0}, 256);
  EXPECT_NEAR(r.count() * r.pixel * r.pixel, 2.0 * std::numbers::pi, 2e-3);
  EXPECT_LT(e(0.5, -0.25), 0.0);
  const double c = std::cos(0.6), s = std::sin(0.6);
  EXPECT_NEAR(e(0.5 + 2.0 * c, -0.25 + 2.0 * s), 0.0, 1e-12);
}

TEST(Shapegen, HalfSpace) {
  const BivariatePolynomial h = gen_half_space({0.0, 2.0}, 1.0);
  EXPECT_EQ(h.degree(), 1);
  EXPECT_LT(h(3.0, 0.0), 0.0);
  EXPECT_GT(h(3.0, 1.0), 0.0);
}

TEST(Shapegen, UnboundedQuarticCrossesThePlane) {
  const ImagePlane plane{18.0, 1.0};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const BivariatePolynomial p = gen_unbounded_quartic(seed, plane);
    // Each vertical line meets the boundary: below inside, above outside.
    for (double x : {-17.0, 0.0, 17.0}) {
      EXPECT_LE(p(x, -17.9), 0.0);
      EXPECT_GT(p(x, 17.9), 0.0);
    }
  }
}

TEST(Shapegen, PolygonHelpers) {
  const std::vector<Eigen::Vector2d> square{{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}};
  EXPECT_DOUBLE_EQ(shoelace_area(square), 4.0);
  const Raster r = rasterize_polygon(square, ImagePlane{2.0, 1.0}, 16);
  EXPECT_EQ(r.count(), 32u * 32u);
  EXPECT_EQ(count_components(r), 1);
}

TEST(Shapegen, BezierShape) {
  const std::array<Eigen::Vector2d, 4> cp{Eigen::Vector2d(-4.5, -3.5), Eigen::Vector2d(4.5, -4.0),
                                          Eigen::Vector2d(4.0, 4.5), Eigen::Vector2d(-5.0, 3.0)};
  const BezierShape b = gen_bezier_shape(cp, ImagePlane{6.0, 1.0}, 256);
  EXPECT_EQ(b.segments.size(), 4u);
  EXPECT_EQ(b.polyline.size(), 1024u);
  EXPECT_EQ(count_components(b.raster), 1);
  const double raster_area = b.raster.count() * b.raster.pixel * b.raster.pixel;
  EXPECT_NEAR(raster_area, std::abs(b.polygon_area), 1e-3 * std::abs(b.polygon_area));
  // Segments join continuously and close the curve.
  for (std::size_t s = 0; s < 4; ++s) EXPECT_LT((b.segments[s][3] - b.segments[(s + 1) % 4][0]).norm(), 1e-12);

  const std::array<Eigen::Vector2d, 4> crossed{Eigen::Vector2d(-4.0, -4.0), Eigen::Vector2d(4.0, 4.0),
                                               Eigen::Vector2d(4.0, -4.0), Eigen::Vector2d(-4.0, 4.0)};
  EXPECT_THROW(gen_bezier_shape(crossed, ImagePlane{6.0, 1.0}), InputError);
  const std::array<Eigen::Vector2d, 4> outside{Eigen::Vector2d(-9.0, -9.0), Eigen::Vector2d(9.0, -9.0),
                                               Eigen::Vector2d(9.0, 9.0), Eigen::Vector2d(-9.0, 9.0)};
  EXPECT_THROW(gen_bezier_shape(outside, ImagePlane{6.0, 1.0}), InputError);
}

TEST(Shapegen, Manifest) {
  const auto m = fixture_manifest("conic", {{"axes", {1.0, 2.0}}}, "test ellipse", {"a.json"});
  EXPECT_EQ(m["kind"], "conic");
  EXPECT_EQ(m["files"][0], "a.json");
}
