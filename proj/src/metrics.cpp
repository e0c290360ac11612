#include "algshape/metrics.hpp"

#include "algshape/errors.hpp"

#include <cmath>
#include <limits>

namespace algshape {

namespace {

void check_same_grid(const Raster& a, const Raster& b) {
  if (a.width != b.width || a.height != b.height || std::abs(a.pixel - b.pixel) > 1e-12 * a.pixel) {
    throw InputError("rasters do not share a pixel grid");
  }
}

std::size_t differing(const Raster& a, const Raster& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) n += a.data[i] != b.data[i];
  return n;
}

nlohmann::json finite_or_inf(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf"); }

}  // namespace

double psnr(const Raster& truth, const Raster& test) {
  check_same_grid(truth, test);
  const std::size_t diff = differing(truth, test);
  if (diff == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(static_cast<double>(truth.data.size()) / static_cast<double>(diff));
}

double psnr(const BivariatePolynomial& truth, const BivariatePolynomial& test, const ImagePlane& region,
            int resolution) {
  return psnr(render_shape(truth, region, resolution), render_shape(test, region, resolution));
}

Raster render_like(const BivariatePolynomial& p, const Raster& like) {
  Raster r = like;
  for (int row = 0; row < r.height; ++row) {
    const Eigen::VectorXd q = p.restrict_to_row(r.y_center(row));
    for (int c = 0; c < r.width; ++c) {
      const double x = r.x_center(c);
      double v = 0.0;
      for (int i = static_cast<int>(q.size()) - 1; i >= 0; --i) v = v * x + q[i];
      r.data[static_cast<std::size_t>(row) * r.width + c] = v <= 0.0 ? 1 : 0;
    }
  }
  return r;
}

double psnr(const Raster& truth, const BivariatePolynomial& test) { return psnr(truth, render_like(test, truth)); }

std::size_t interior_differences(const Raster& truth, const Raster& test) {
  check_same_grid(truth, test);
  std::size_t n = 0;
  for (int r = 0; r < truth.height; ++r) {
    for (int c = 0; c < truth.width; ++c) {
      const auto v = truth.at(r, c);
      if (v == test.at(r, c)) continue;
      bool boundary = false;
      for (int dr = -1; dr <= 1 && !boundary; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr;
          const int cc = c + dc;
          if (rr < 0 || cc < 0 || rr >= truth.height || cc >= truth.width) continue;
          if (truth.at(rr, cc) != v) {
            boundary = true;
            break;
          }
        }
      }
      n += !boundary;
    }
  }
  return n;
}

Evaluation evaluate(const BivariatePolynomial& truth, const BivariatePolynomial& test, const ImagePlane& region,
                    int resolution) {
  const Raster a = render_shape(truth, region, resolution);
  const Raster b = render_shape(test, region, resolution);
  Evaluation e;
  e.psnr_db = psnr(a, b);
  e.differing_pixels = differing(a, b);
  e.interior_differences = interior_differences(a, b);
  e.zero_set_distance = zero_set_distance(truth, test, region);
  return e;
}

Evaluation evaluate(const Raster& truth, const BivariatePolynomial& test) {
  const Raster b = render_like(test, truth);
  Evaluation e;
  e.psnr_db = psnr(truth, b);
  e.differing_pixels = differing(truth, b);
  e.interior_differences = interior_differences(truth, b);
  return e;
}

nlohmann::json to_json(const Evaluation& e) {
  nlohmann::json j = {{"psnr_db", finite_or_inf(e.psnr_db)},
                      {"differing_pixels", e.differing_pixels},
                      {"interior_differences", e.interior_differences}};
  if (e.zero_set_distance) j["zero_set_distance"] = finite_or_inf(*e.zero_set_distance);
  if (e.sample_snr_db) j["sample_snr_db"] = finite_or_inf(*e.sample_snr_db);
  return j;
}

}  // namespace algshape
