#include "algshape/errors.hpp"
#include "algshape/metrics.hpp"
#include "algshape/shapegen.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace algshape;

TEST(Metrics, IdenticalShapesAreInfinite) {
  const ImagePlane region{2.0, 1.0};
  const BivariatePolynomial p = gen_conic({0.0, 0.0}, {1.0, 0.5}, 0.2);
  EXPECT_TRUE(std::isinf(psnr(p, p, region)));
  const Evaluation e = evaluate(p, 3.0 * p, region);
  EXPECT_EQ(e.differing_pixels, 0u);
  EXPECT_EQ(to_json(e)["psnr_db"], "inf");
}

TEST(Metrics, HalfPlaneStripCount) {
  // x <= 0 against x <= 0.25 on [-2, 2]^2 at 16 px/unit: a 4-pixel strip.
  const ImagePlane region{2.0, 1.0};
  const Evaluation e = evaluate(gen_half_space({1.0, 0.0}, 0.0), gen_half_space({1.0, 0.0}, 0.25), region, 16);
  EXPECT_EQ(e.differing_pixels, 4u * 64u);
  EXPECT_NEAR(e.psnr_db, 10.0 * std::log10(64.0 * 64.0 / (4.0 * 64.0)), 1e-12);
  // Only the strip column next to the truth boundary is exempt.
  EXPECT_EQ(e.interior_differences, 3u * 64u);
  ASSERT_TRUE(e.zero_set_distance.has_value());
  EXPECT_NEAR(*e.zero_set_distance, 0.25, 1e-9);
}

TEST(Metrics, BoundaryPixelsAreNotInterior) {
  const ImagePlane region{3.0, 1.0};
  const BivariatePolynomial a = gen_conic({0.0, 0.0}, {2.0, 2.0}, 0.0);
  const BivariatePolynomial b = gen_conic({0.0, 0.0}, {2.0 + 0.5 / 256, 2.0 + 0.5 / 256}, 0.0);
  const Evaluation e = evaluate(a, b, region, 256);
  EXPECT_GT(e.differing_pixels, 0u);
  EXPECT_EQ(e.interior_differences, 0u);
}

TEST(Metrics, RasterTruth) {
  const ImagePlane plane{3.0, 1.0};
  const BivariatePolynomial p = gen_conic({0.3, 0.0}, {2.0, 1.0}, 0.4);
  const Raster truth = render_shape(p, plane, 64);
  EXPECT_TRUE(std::isinf(psnr(truth, p)));
  EXPECT_EQ(render_like(p, truth).data, truth.data);
  Raster other = render_shape(p, ImagePlane{2.0, 1.0}, 64);
  EXPECT_THROW(psnr(truth, other), InputError);
}
