#include "algshape/sampler.hpp"

#include "algshape/errors.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace algshape {

IndexRange default_index_range(const ImagePlane& plane, const BSplineKernel& kernel) {
  // |k| < L/T + (m+1)/2
  const double bound = plane.half_width / plane.period + kernel.half_support();
  const int hi = static_cast<int>(std::ceil(bound - 1e-12)) - 1;
  return {-hi, hi};
}

namespace {

Eigen::MatrixXd kernel_table(const BSplineKernel& kernel, int cells, double lo, double h, double period,
                             IndexRange range) {
  Eigen::MatrixXd t(cells, range.size());
  for (int c = 0; c < cells; ++c) {
    const double u = (lo + (c + 0.5) * h) / period;
    for (int k = range.lo; k <= range.hi; ++k) t(c, k - range.lo) = kernel(u - k);
  }
  return t;
}

Eigen::MatrixXd prefix_rows(const Eigen::MatrixXd& t) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(t.rows() + 1, t.cols());
  for (int c = 0; c < t.rows(); ++c) p.row(c + 1) = p.row(c) + t.row(c);
  return p;
}

/// Accumulates one raster row given as half-open runs [c0, c1) of inside cells.
void accumulate_row(const Eigen::MatrixXd& prefix_x, const Eigen::MatrixXd& table_y, int row,
                    const std::vector<std::pair<int, int>>& runs, Eigen::MatrixXd& acc) {
  if (runs.empty()) return;
  Eigen::VectorXd t = Eigen::VectorXd::Zero(prefix_x.cols());
  for (const auto& [c0, c1] : runs) t += (prefix_x.row(c1) - prefix_x.row(c0)).transpose();
  for (int l = 0; l < table_y.cols(); ++l) {
    const double w = table_y(row, l);
    if (w != 0.0) acc.col(l) += w * t;
  }
}

void check_ranges(IndexRange k_range, IndexRange l_range) {
  if (k_range.size() <= 0 || l_range.size() <= 0) throw InputError("sample index ranges must be nonempty");
}

}  // namespace

ShapeSampler::ShapeSampler(const ImagePlane& plane, const BSplineKernel& kernel, IndexRange k_range,
                           IndexRange l_range, int resolution)
    : plane_(plane), k_range_(k_range), l_range_(l_range), resolution_(resolution) {
  plane.validate();
  check_ranges(k_range, l_range);
  if (resolution < 1) throw InputError("quadrature resolution must be >= 1");
  cells_ = static_cast<int>(std::lround(2.0 * plane.half_width * resolution));
  h_ = 2.0 * plane.half_width / cells_;
  prefix_x_ = prefix_rows(kernel_table(kernel, cells_, -plane.half_width, h_, plane.period, k_range));
  table_y_ = kernel_table(kernel, cells_, -plane.half_width, h_, plane.period, l_range);
}

Eigen::MatrixXd ShapeSampler::operator()(const BivariatePolynomial& p) const {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(k_range_.size(), l_range_.size());
  std::vector<std::pair<int, int>> runs;
  const int deg = p.degree();
  for (int r = 0; r < cells_; ++r) {
    if (table_y_.row(r).isZero(0.0)) continue;
    const double y = -plane_.half_width + (r + 0.5) * h_;
    const Eigen::VectorXd q = p.restrict_to_row(y);
    runs.clear();
    int start = -1;
    for (int c = 0; c < cells_; ++c) {
      const double x = -plane_.half_width + (c + 0.5) * h_;
      double v = 0.0;
      for (int i = deg; i >= 0; --i) v = v * x + q[i];
      const bool inside = v <= 0.0;
      if (inside && start < 0) start = c;
      if (!inside && start >= 0) {
        runs.emplace_back(start, c);
        start = -1;
      }
    }
    if (start >= 0) runs.emplace_back(start, cells_);
    accumulate_row(prefix_x_, table_y_, r, runs, acc);
  }
  const double scale = h_ * h_ / (plane_.period * plane_.period);
  return acc * scale;
}

SampleGrid sample_shape(const BivariatePolynomial& p, const ImagePlane& plane, const BSplineKernel& kernel,
                        IndexRange k_range, IndexRange l_range, int resolution) {
  const ShapeSampler sampler(plane, kernel, k_range, l_range, resolution);
  SampleGrid g;
  g.values = sampler(p);
  g.k_range = k_range;
  g.l_range = l_range;
  g.m = kernel.order();
  g.plane = plane;
  return g;
}

SampleGrid sample_shape(const BivariatePolynomial& p, const ImagePlane& plane, const BSplineKernel& kernel,
                        int resolution) {
  const IndexRange r = default_index_range(plane, kernel);
  return sample_shape(p, plane, kernel, r, r, resolution);
}

SampleGrid sample_raster(const Raster& raster, const ImagePlane& plane, const BSplineKernel& kernel,
                         IndexRange k_range, IndexRange l_range) {
  plane.validate();
  check_ranges(k_range, l_range);
  const double span = 2.0 * plane.half_width;
  if (std::abs(raster.width * raster.pixel - span) > 1e-9 * span ||
      std::abs(raster.height * raster.pixel - span) > 1e-9 * span ||
      std::abs(raster.x_min + plane.half_width) > 1e-9 * span) {
    throw InputError("raster does not cover the image plane");
  }
  const double h = raster.pixel;
  const Eigen::MatrixXd prefix_x =
      prefix_rows(kernel_table(kernel, raster.width, -plane.half_width, h, plane.period, k_range));
  const Eigen::MatrixXd table_y = kernel_table(kernel, raster.height, -plane.half_width, h, plane.period, l_range);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(k_range.size(), l_range.size());
  std::vector<std::pair<int, int>> runs;
  for (int r = 0; r < raster.height; ++r) {
    const int row = raster.height - 1 - r;  // raster row 0 is the top
    runs.clear();
    int start = -1;
    for (int c = 0; c < raster.width; ++c) {
      const bool inside = raster.at(row, c) != 0;
      if (inside && start < 0) start = c;
      if (!inside && start >= 0) {
        runs.emplace_back(start, c);
        start = -1;
      }
    }
    if (start >= 0) runs.emplace_back(start, raster.width);
    accumulate_row(prefix_x, table_y, r, runs, acc);
  }
  SampleGrid g;
  g.values = acc * (h * h / (plane.period * plane.period));
  g.k_range = k_range;
  g.l_range = l_range;
  g.m = kernel.order();
  g.plane = plane;
  return g;
}

SampleGrid add_noise(const SampleGrid& grid, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0) return grid;
  if (grid.noisy()) throw InputError("add_noise expects a noiseless grid");
  const double signal = grid.values.squaredNorm();
  if (signal == 0.0) throw InputError("SNR is undefined for an all-zero grid");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd noise(grid.values.rows(), grid.values.cols());
  for (int c = 0; c < noise.cols(); ++c) {
    for (int r = 0; r < noise.rows(); ++r) noise(r, c) = normal(rng);
  }
  const double target = signal / std::pow(10.0, snr_db / 10.0);
  noise *= std::sqrt(target / noise.squaredNorm());
  SampleGrid out = grid;
  out.values += noise;
  out.noise = NoiseInfo{snr_db, seed};
  return out;
}

double sample_snr(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& test) {
  if (reference.rows() != test.rows() || reference.cols() != test.cols()) {
    throw InputError("sample grids have different shapes");
  }
  const double err = (reference - test).squaredNorm();
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(reference.squaredNorm() / err);
}

double sample_snr(const SampleGrid& reference, const SampleGrid& test) {
  if (!(reference.k_range == test.k_range) || !(reference.l_range == test.l_range)) {
    throw InputError("sample grids cover different index ranges");
  }
  return sample_snr(reference.values, test.values);
}

nlohmann::json sample_metadata(const SampleGrid& grid) {
  nlohmann::json j = {{"k_range", {grid.k_range.lo, grid.k_range.hi}},
                      {"l_range", {grid.l_range.lo, grid.l_range.hi}},
                      {"m", grid.m},
                      {"L", grid.plane.half_width},
                      {"T", grid.plane.period},
                      {"layout", "rows=k ascending, cols=l ascending"}};
  if (grid.noise) {
    j["noise"] = {{"snr_db", grid.noise->snr_db}, {"seed", grid.noise->seed}};
  } else {
    j["noise"] = nullptr;
  }
  return j;
}

namespace {

std::filesystem::path sidecar_path(const std::string& csv_path) {
  return std::filesystem::path(csv_path).replace_extension(".json");
}

}  // namespace

void write_samples(const SampleGrid& grid, const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw InputError("cannot open " + csv_path + " for writing");
  out.precision(17);
  for (int r = 0; r < grid.values.rows(); ++r) {
    for (int c = 0; c < grid.values.cols(); ++c) {
      if (c) out << ',';
      out << grid.values(r, c);
    }
    out << '\n';
  }
  std::ofstream meta(sidecar_path(csv_path));
  if (!meta) throw InputError("cannot write sample metadata next to " + csv_path);
  meta << sample_metadata(grid).dump(2) << '\n';
}

SampleGrid read_samples(const std::string& csv_path) {
  std::ifstream meta_in(sidecar_path(csv_path));
  if (!meta_in) throw InputError("missing metadata sidecar for " + csv_path);
  SampleGrid g;
  try {
    nlohmann::json meta;
    meta_in >> meta;
    g.k_range = {meta.at("k_range")[0].get<int>(), meta.at("k_range")[1].get<int>()};
    g.l_range = {meta.at("l_range")[0].get<int>(), meta.at("l_range")[1].get<int>()};
    g.m = meta.at("m").get<int>();
    g.plane = {meta.at("L").get<double>(), meta.at("T").get<double>()};
    if (meta.contains("noise") && !meta["noise"].is_null()) {
      g.noise = NoiseInfo{meta["noise"].at("snr_db").get<double>(), meta["noise"].at("seed").get<std::uint64_t>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(csv_path + " metadata: " + e.what());
  }
  g.plane.validate();
  std::ifstream in(csv_path);
  if (!in) throw InputError("cannot open " + csv_path);
  g.values.resize(g.k_range.size(), g.l_range.size());
  std::string line;
  int r = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (r >= g.values.rows()) throw InputError(csv_path + ": more rows than k_range");
    std::stringstream ss(line);
    std::string cell;
    int c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= g.values.cols()) throw InputError(csv_path + ": more columns than l_range");
      try {
        g.values(r, c++) = std::stod(cell);
      } catch (const std::exception&) {
        throw InputError(csv_path + ": bad number '" + cell + "'");
      }
    }
    if (c != g.values.cols()) throw InputError(csv_path + ": short row");
    ++r;
  }
  if (r != g.values.rows()) throw InputError(csv_path + ": fewer rows than k_range");
  return g;
}

}  // namespace algshape
