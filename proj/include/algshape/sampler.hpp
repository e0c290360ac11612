#pragma once

#include "algshape/bspline.hpp"
#include "algshape/poly2d.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include <json.hpp>

namespace algshape {

/// Inclusive integer interval.
struct IndexRange {
  int lo = 0;
  int hi = -1;

  int size() const { return hi - lo + 1; }
  bool contains(int k) const { return k >= lo && k <= hi; }
  bool operator==(const IndexRange&) const = default;
};

/// Indices k whose kernel beta(x/T - k) overlaps the open interval (-L, L).
IndexRange default_index_range(const ImagePlane& plane, const BSplineKernel& kernel);

struct NoiseInfo {
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
};

/// Samples d_{k,l}; values(k - k_range.lo, l - l_range.lo).
struct SampleGrid {
  Eigen::MatrixXd values;
  IndexRange k_range;
  IndexRange l_range;
  int m = 0;
  ImagePlane plane;
  std::optional<NoiseInfo> noise;

  double at(int k, int l) const { return values(k - k_range.lo, l - l_range.lo); }
  bool noisy() const { return noise.has_value() && std::isfinite(noise->snr_db); }
};

/// d_{k,l} = (1/T^2) iint_Omega 1{p <= 0} beta(x/T - k) beta(y/T - l) dx dy by
/// midpoint supersampling with `resolution` sub-cells per unit length.
SampleGrid sample_shape(const BivariatePolynomial& p, const ImagePlane& plane, const BSplineKernel& kernel,
                        IndexRange k_range, IndexRange l_range, int resolution = 64);
SampleGrid sample_shape(const BivariatePolynomial& p, const ImagePlane& plane, const BSplineKernel& kernel,
                        int resolution = 64);

/// Same forward model for an arbitrary binary raster covering the plane; the
/// raster's pixels act as the quadrature sub-cells.
SampleGrid sample_raster(const Raster& raster, const ImagePlane& plane, const BSplineKernel& kernel,
                         IndexRange k_range, IndexRange l_range);

/// Adds i.i.d. Gaussian noise rescaled so the realised SNR is exactly snr_db.
/// snr_db = +inf returns the grid unchanged.
SampleGrid add_noise(const SampleGrid& grid, double snr_db, std::uint64_t seed);

/// 10 log10(|ref|^2 / |ref - test|^2); +inf for identical grids.
double sample_snr(const SampleGrid& reference, const SampleGrid& test);
double sample_snr(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& test);

/// Reusable forward operator: caches the kernel tables for one grid geometry
/// and quadrature resolution so repeated evaluations only pay for the
/// indicator scan.
class ShapeSampler {
 public:
  ShapeSampler(const ImagePlane& plane, const BSplineKernel& kernel, IndexRange k_range, IndexRange l_range,
               int resolution = 64);

  Eigen::MatrixXd operator()(const BivariatePolynomial& p) const;
  int resolution() const { return resolution_; }

 private:
  ImagePlane plane_;
  IndexRange k_range_;
  IndexRange l_range_;
  int resolution_;
  int cells_;
  double h_;
  Eigen::MatrixXd prefix_x_;  // (cells + 1) x K cumulative kernel weights along x
  Eigen::MatrixXd table_y_;   // cells x L kernel weights along y
};

void write_samples(const SampleGrid& grid, const std::string& csv_path);
SampleGrid read_samples(const std::string& csv_path);
nlohmann::json sample_metadata(const SampleGrid& grid);

}  // namespace algshape
