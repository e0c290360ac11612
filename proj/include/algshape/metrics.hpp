#pragma once

#include "algshape/poly2d.hpp"
#include "algshape/sampler.hpp"

#include <cstddef>
#include <optional>

#include <json.hpp>

namespace algshape {

/// 10 log10(N / N_diff) for binary rasters (peak 1); +inf when identical.
double psnr(const Raster& truth, const Raster& test);

/// Both shapes rendered over `region` at `resolution` pixels per unit.
double psnr(const BivariatePolynomial& truth, const BivariatePolynomial& test, const ImagePlane& region,
            int resolution = 256);

/// `test` rendered on the pixel grid of `truth`.
double psnr(const Raster& truth, const BivariatePolynomial& test);

/// 1{p <= 0} at the pixel centers of `like`.
Raster render_like(const BivariatePolynomial& p, const Raster& like);

/// Differing pixels that are not boundary pixels of `truth` (pixels whose
/// 8-neighbourhood in `truth` holds both values).
std::size_t interior_differences(const Raster& truth, const Raster& test);

struct Evaluation {
  double psnr_db = 0.0;
  std::size_t differing_pixels = 0;
  std::size_t interior_differences = 0;
  std::optional<double> zero_set_distance;  // truth -> test, polynomials only
  std::optional<double> sample_snr_db;
};

Evaluation evaluate(const BivariatePolynomial& truth, const BivariatePolynomial& test, const ImagePlane& region,
                    int resolution = 256);
Evaluation evaluate(const Raster& truth, const BivariatePolynomial& test);

/// Infinite values are written as the string "inf".
nlohmann::json to_json(const Evaluation& e);

}  // namespace algshape
