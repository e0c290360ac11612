#include "algshape/poly2d.hpp"

#include "algshape/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace algshape {

std::pair<int, int> monomial_exponents(int index) {
  int d = 0;
  while (monomial_count(d) <= index) ++d;
  const int i = index - d * (d + 1) / 2;
  return {i, d - i};
}

BivariatePolynomial::BivariatePolynomial(int degree)
    : degree_(degree), coeffs_(Eigen::VectorXd::Zero(monomial_count(degree))) {
  if (degree < 0) throw InputError("polynomial degree must be nonnegative");
}

BivariatePolynomial::BivariatePolynomial(int degree, Eigen::VectorXd coeffs)
    : degree_(degree), coeffs_(std::move(coeffs)) {
  if (degree < 0) throw InputError("polynomial degree must be nonnegative");
  if (coeffs_.size() != monomial_count(degree)) {
    throw InputError("coefficient vector length " + std::to_string(coeffs_.size()) +
                     " does not match degree " + std::to_string(degree));
  }
}

double BivariatePolynomial::operator()(double x, double y) const {
  // Horner in y of Horner-in-x row polynomials.
  double outer = 0.0;
  for (int j = degree_; j >= 0; --j) {
    double inner = 0.0;
    for (int i = degree_ - j; i >= 0; --i) inner = inner * x + coeffs_[monomial_index(i, j)];
    outer = outer * y + inner;
  }
  return outer;
}

std::pair<double, double> BivariatePolynomial::gradient(double x, double y) const {
  double gx = 0.0;
  double gy = 0.0;
  for (int j = degree_; j >= 0; --j) {
    double dx_row = 0.0;
    for (int i = degree_ - j; i >= 1; --i) dx_row = dx_row * x + i * coeffs_[monomial_index(i, j)];
    gx = gx * y + dx_row;
  }
  for (int i = degree_; i >= 0; --i) {
    double dy_col = 0.0;
    for (int j = degree_ - i; j >= 1; --j) dy_col = dy_col * y + j * coeffs_[monomial_index(i, j)];
    gy = gy * x + dy_col;
  }
  return {gx, gy};
}

Eigen::VectorXd BivariatePolynomial::restrict_to_row(double y) const {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(degree_ + 1);
  for (int i = 0; i <= degree_; ++i) {
    double acc = 0.0;
    for (int j = degree_ - i; j >= 0; --j) acc = acc * y + coeffs_[monomial_index(i, j)];
    row[i] = acc;
  }
  return row;
}

BivariatePolynomial BivariatePolynomial::with_degree(int degree) const {
  if (degree < degree_) {
    for (int k = monomial_count(degree); k < coeffs_.size(); ++k) {
      if (coeffs_[k] != 0.0) throw InputError("cannot lower structural degree of a polynomial with nonzero terms");
    }
  }
  BivariatePolynomial out(degree);
  const int n = std::min(degree, degree_);
  out.coeffs_.head(monomial_count(n)) = coeffs_.head(monomial_count(n));
  return out;
}

BivariatePolynomial BivariatePolynomial::rescaled(double s) const {
  BivariatePolynomial out(*this);
  for (int k = 0; k < coeffs_.size(); ++k) {
    const auto [i, j] = monomial_exponents(k);
    out.coeffs_[k] = coeffs_[k] / std::pow(s, i + j);
  }
  return out;
}

BivariatePolynomial BivariatePolynomial::operator*(double c) const {
  return BivariatePolynomial(degree_, coeffs_ * c);
}

BivariatePolynomial operator*(double c, const BivariatePolynomial& p) { return p * c; }

void ImagePlane::validate() const {
  if (!(half_width > 0.0)) throw InputError("image plane half-width must be positive");
  if (!(period > 0.0)) throw InputError("sampling period must be positive");
  const double cells = 2.0 * half_width / period;
  if (std::abs(cells - std::round(cells)) > 1e-9 * std::max(1.0, cells)) {
    throw InputError("2L/T must be an integer (lattice must align with the plane)");
  }
}

std::size_t Raster::count() const {
  return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
}

Raster render_shape(const BivariatePolynomial& p, const ImagePlane& plane, int resolution) {
  if (resolution < 1) throw InputError("render resolution must be >= 1");
  plane.validate();
  Raster r;
  r.pixel = 1.0 / resolution;
  r.width = r.height = static_cast<int>(std::lround(2.0 * plane.half_width * resolution));
  r.x_min = -plane.half_width;
  r.y_max = plane.half_width;
  r.data.assign(static_cast<std::size_t>(r.width) * r.height, 0);
  for (int row = 0; row < r.height; ++row) {
    const Eigen::VectorXd q = p.restrict_to_row(r.y_center(row));
    for (int col = 0; col < r.width; ++col) {
      const double x = r.x_center(col);
      double v = 0.0;
      for (int i = static_cast<int>(q.size()) - 1; i >= 0; --i) v = v * x + q[i];
      r.data[static_cast<std::size_t>(row) * r.width + col] = v <= 0.0 ? 1 : 0;
    }
  }
  return r;
}

void write_pgm(const Raster& raster, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path + " for writing");
  out << "P5\n" << raster.width << " " << raster.height << "\n255\n";
  std::vector<char> line(raster.width);
  for (int row = 0; row < raster.height; ++row) {
    for (int col = 0; col < raster.width; ++col) line[col] = raster.at(row, col) ? char(255) : char(0);
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
}

Raster read_pgm(const std::string& path, double x_min, double y_max, double pixel) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::string magic;
  int maxval = 0;
  Raster r;
  in >> magic >> r.width >> r.height >> maxval;
  if (magic != "P5" || r.width <= 0 || r.height <= 0 || maxval <= 0 || maxval > 255) {
    throw InputError(path + ": not an 8-bit binary PGM");
  }
  in.get();
  std::vector<unsigned char> buf(static_cast<std::size_t>(r.width) * r.height);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!in) throw InputError(path + ": truncated PGM");
  r.x_min = x_min;
  r.y_max = y_max;
  r.pixel = pixel;
  r.data.resize(buf.size());
  for (std::size_t k = 0; k < buf.size(); ++k) r.data[k] = buf[k] * 2 > maxval ? 1 : 0;
  return r;
}

void write_raster_csv(const Raster& raster, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path + " for writing");
  for (int row = 0; row < raster.height; ++row) {
    for (int col = 0; col < raster.width; ++col) {
      if (col) out << ',';
      out << int(raster.at(row, col));
    }
    out << '\n';
  }
}

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int t = 1; t <= k; ++t) r = r * (n - k + t) / t;
  return r;
}

}  // namespace

ShiftMatrix shift_matrix(int degree, double x0, double y0) {
  const int size = monomial_count(degree);
  ShiftMatrix B;
  B.x0 = x0;
  B.y0 = y0;
  B.degree = degree;
  B.entries = Eigen::MatrixXd::Zero(size, size);
  for (int row = 0; row < size; ++row) {
    const auto [k, l] = monomial_exponents(row);
    for (int col = 0; col < size; ++col) {
      const auto [i, j] = monomial_exponents(col);
      if (i < k || j < l) continue;
      B.entries(row, col) = binomial(i, k) * binomial(j, l) * std::pow(x0, i - k) * std::pow(y0, j - l);
    }
  }
  return B;
}

BivariatePolynomial ShiftMatrix::apply(const BivariatePolynomial& p) const {
  if (p.degree() != degree) throw InputError("shift matrix degree does not match polynomial degree");
  return BivariatePolynomial(degree, entries * p.coeffs());
}

namespace {

struct ScanAxis {
  double lo;
  double step;
  int nodes;
  double at(int k) const { return lo + k * step; }
};

Eigen::Vector2d bisect(const BivariatePolynomial& p, Eigen::Vector2d a, Eigen::Vector2d b, double fa,
                       int steps) {
  for (int s = 0; s < steps; ++s) {
    const Eigen::Vector2d mid = 0.5 * (a + b);
    const double fm = p(mid.x(), mid.y());
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

std::vector<Eigen::Vector2d> zero_set_points(const BivariatePolynomial& p, const ImagePlane& plane, int grid,
                                             int bisections) {
  const ScanAxis axis{-plane.half_width, 2.0 * plane.half_width / grid, grid + 1};
  Eigen::MatrixXd values(axis.nodes, axis.nodes);  // (row = y index, col = x index)
  for (int r = 0; r < axis.nodes; ++r) {
    for (int c = 0; c < axis.nodes; ++c) values(r, c) = p(axis.at(c), axis.at(r));
  }
  std::vector<Eigen::Vector2d> pts;
  auto edge = [&](int r0, int c0, int r1, int c1) {
    const double f0 = values(r0, c0);
    const double f1 = values(r1, c1);
    const Eigen::Vector2d a(axis.at(c0), axis.at(r0));
    const Eigen::Vector2d b(axis.at(c1), axis.at(r1));
    if (f0 == 0.0) {
      pts.push_back(a);
    } else if ((f0 < 0.0) != (f1 < 0.0) && f1 != 0.0) {
      pts.push_back(bisect(p, a, b, f0, bisections));
    }
  };
  for (int r = 0; r < axis.nodes; ++r) {
    for (int c = 0; c + 1 < axis.nodes; ++c) edge(r, c, r, c + 1);
  }
  for (int c = 0; c < axis.nodes; ++c) {
    for (int r = 0; r + 1 < axis.nodes; ++r) edge(r, c, r + 1, c);
  }
  return pts;
}

namespace {

/// Uniform bucket grid for nearest-neighbour queries on boundary samples.
class PointIndex {
 public:
  PointIndex(const std::vector<Eigen::Vector2d>& pts, double lo, double cell)
      : pts_(pts), lo_(lo), cell_(cell) {
    for (std::size_t k = 0; k < pts.size(); ++k) buckets_[key(cell_of(pts[k].x()), cell_of(pts[k].y()))].push_back(k);
  }

  double nearest(const Eigen::Vector2d& q) const {
    const int cx = cell_of(q.x());
    const int cy = cell_of(q.y());
    double best = std::numeric_limits<double>::infinity();
    for (int ring = 0;; ++ring) {
      for (int dx = -ring; dx <= ring; ++dx) {
        for (int dy = -ring; dy <= ring; ++dy) {
          if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
          const auto it = buckets_.find(key(cx + dx, cy + dy));
          if (it == buckets_.end()) continue;
          for (std::size_t k : it->second) best = std::min(best, (pts_[k] - q).norm());
        }
      }
      // Every point outside the searched rings is at least ring * cell away.
      if (best <= ring * cell_) return best;
      if (ring > 100000) return best;
    }
  }

 private:
  int cell_of(double v) const { return static_cast<int>(std::floor((v - lo_) / cell_)); }
  static long long key(int a, int b) { return (static_cast<long long>(a) << 32) ^ static_cast<unsigned>(b); }

  const std::vector<Eigen::Vector2d>& pts_;
  double lo_;
  double cell_;
  std::unordered_map<long long, std::vector<std::size_t>> buckets_;
};

/// Newton projection of a point onto {q = 0}; returns the distance to the
/// landing point, or +inf if the iteration does not settle on the curve.
double newton_projection_distance(const BivariatePolynomial& q, const Eigen::Vector2d& start,
                                  const ImagePlane& plane) {
  Eigen::Vector2d z = start;
  for (int it = 0; it < 30; ++it) {
    const double f = q(z.x(), z.y());
    const auto [gx, gy] = q.gradient(z.x(), z.y());
    const double g2 = gx * gx + gy * gy;
    if (g2 == 0.0) return std::numeric_limits<double>::infinity();
    const Eigen::Vector2d step = (f / g2) * Eigen::Vector2d(gx, gy);
    z -= step;
    if (step.norm() < 1e-13 * (1.0 + z.norm())) break;
  }
  const auto [gx, gy] = q.gradient(z.x(), z.y());
  const double residual = std::abs(q(z.x(), z.y())) / std::max(std::hypot(gx, gy), 1e-300);
  const double L = plane.half_width;
  if (residual > 1e-9 * (1.0 + L) || std::abs(z.x()) > L || std::abs(z.y()) > L) {
    return std::numeric_limits<double>::infinity();
  }
  return (z - start).norm();
}

}  // namespace

std::optional<double> zero_set_distance(const BivariatePolynomial& p, const BivariatePolynomial& q,
                                        const ImagePlane& plane, int grid) {
  const auto from = zero_set_points(p, plane, grid);
  if (from.empty()) return std::nullopt;
  const auto to = zero_set_points(q, plane, grid);
  if (to.empty()) return std::numeric_limits<double>::infinity();
  const double cell = 4.0 * 2.0 * plane.half_width / grid;
  const PointIndex index(to, -plane.half_width, cell);
  double worst = 0.0;
  for (const auto& pt : from) {
    const double d = std::min(index.nearest(pt), newton_projection_distance(q, pt, plane));
    worst = std::max(worst, d);
  }
  return worst;
}

nlohmann::json to_json(const BivariatePolynomial& p) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (int k = 0; k < p.coeffs().size(); ++k) {
    if (p.coeffs()[k] == 0.0) continue;
    const auto [i, j] = monomial_exponents(k);
    coeffs.push_back({{"i", i}, {"j", j}, {"a", p.coeffs()[k]}});
  }
  return {{"degree", p.degree()}, {"coeffs", coeffs}};
}

BivariatePolynomial polynomial_from_json(const nlohmann::json& j) {
  try {
    BivariatePolynomial p(j.at("degree").get<int>());
    for (const auto& term : j.at("coeffs")) {
      const int i = term.at("i").get<int>();
      const int jj = term.at("j").get<int>();
      if (i < 0 || jj < 0 || i + jj > p.degree()) {
        throw InputError("monomial (" + std::to_string(i) + "," + std::to_string(jj) + ") exceeds degree");
      }
      p.set_coeff(i, jj, term.at("a").get<double>());
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed polynomial JSON: ") + e.what());
  }
}

BivariatePolynomial load_polynomial(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  return polynomial_from_json(j);
}

void save_polynomial(const BivariatePolynomial& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path + " for writing");
  out << to_json(p).dump(2) << '\n';
}

}  // namespace algshape
