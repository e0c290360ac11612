#include "algshape/shapegen.hpp"

#include "algshape/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <random>

namespace algshape {

namespace {

/// a x^2 + b x y + c y^2 + d x + e y
struct Quadratic {
  double a, b, c, d, e;
};

BivariatePolynomial square(const Quadratic& q) {
  BivariatePolynomial p(4);
  auto add = [&](int i, int j, double v) { p.set_coeff(i, j, p.coeff(i, j) + v); };
  const double t[5] = {q.a, q.b, q.c, q.d, q.e};
  const int ex[5][2] = {{2, 0}, {1, 1}, {0, 2}, {1, 0}, {0, 1}};
  for (int u = 0; u < 5; ++u) {
    for (int v = 0; v < 5; ++v) add(ex[u][0] + ex[v][0], ex[u][1] + ex[v][1], t[u] * t[v]);
  }
  return p;
}

BivariatePolynomial normalized_inf(const BivariatePolynomial& p) {
  const double s = p.coeffs().cwiseAbs().maxCoeff();
  return p * (1.0 / s);
}

}  // namespace

double leading_form_min(const BivariatePolynomial& p, int directions) {
  const int n = p.degree();
  double best = std::numeric_limits<double>::infinity();
  for (int d = 0; d < directions; ++d) {
    const double th = 2.0 * std::numbers::pi * d / directions;
    const double c = std::cos(th);
    const double s = std::sin(th);
    double v = 0.0;
    for (int i = 0; i <= n; ++i) v += p.coeff(i, n - i) * std::pow(c, i) * std::pow(s, n - i);
    best = std::min(best, v);
  }
  return best;
}

BivariatePolynomial gen_bounded_quartic(std::uint64_t seed, const ImagePlane& plane, double fill) {
  plane.validate();
  if (!(fill > 0.0 && fill < 1.0)) throw InputError("fill must lie in (0, 1)");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  constexpr int box_cells = 320;  // [-4, 4]^2 scan of the unit frame
  constexpr double box = 4.0;
  for (int attempt = 0; attempt < 100; ++attempt) {
    Quadratic q1{gauss(rng), gauss(rng), gauss(rng), 0.5 * gauss(rng), 0.5 * gauss(rng)};
    Quadratic q2{gauss(rng), gauss(rng), gauss(rng), 0.5 * gauss(rng), 0.5 * gauss(rng)};
    const double eta = 0.2 + 0.3 * unif(rng);
    BivariatePolynomial f = square(q1);
    f.coeffs() += square(q2).coeffs();
    f.set_coeff(4, 0, f.coeff(4, 0) + eta);
    f.set_coeff(0, 4, f.coeff(0, 4) + eta);
    for (int c = 1; c < monomial_count(3); ++c) f.coeffs()[c] += 0.3 * gauss(rng);
    f.coeffs()[0] = 0.0;
    if (leading_form_min(f) <= 0.0) continue;

    // Constant between the global minimum and the minimum on the unit circle.
    double fmin = std::numeric_limits<double>::infinity();
    for (int r = 0; r <= box_cells; ++r) {
      for (int c = 0; c <= box_cells; ++c) {
        fmin = std::min(fmin, f(-box + 2 * box * c / box_cells, -box + 2 * box * r / box_cells));
      }
    }
    double fcirc = std::numeric_limits<double>::infinity();
    for (int d = 0; d < 720; ++d) {
      const double th = 2.0 * std::numbers::pi * d / 720;
      fcirc = std::min(fcirc, f(std::cos(th), std::sin(th)));
    }
    if (!(fcirc - fmin > 1e-3)) continue;
    BivariatePolynomial p = f;
    p.coeffs()[0] = -(fmin + (0.4 + 0.5 * unif(rng)) * (fcirc - fmin));

    // Inside the unit disk only, with a reasonable area.
    bool outside_disk = false;
    int inside = 0;
    const double h = 2 * box / box_cells;
    for (int r = 0; r < box_cells && !outside_disk; ++r) {
      for (int c = 0; c < box_cells; ++c) {
        const double x = -box + (c + 0.5) * h;
        const double y = -box + (r + 0.5) * h;
        if (p(x, y) <= 0.0) {
          if (x * x + y * y >= 1.0) {
            outside_disk = true;
            break;
          }
          ++inside;
        }
      }
    }
    if (outside_disk || inside * h * h < 0.15 * std::numbers::pi) continue;
    // Keep the boundary away from the origin so that a_00 is well defined.
    const auto [gx, gy] = p.gradient(0.0, 0.0);
    const double gn = std::hypot(gx, gy);
    if (gn > 0.0 && std::abs(p(0.0, 0.0)) / gn < 0.05) continue;

    BivariatePolynomial out = normalized_inf(p).rescaled(fill * plane.half_width);
    const Raster ras = render_shape(out, plane, 32);
    if (count_components(ras) > 4) continue;
    return normalized_inf(out);
  }
  throw NumericalError("no admissible bounded quartic after 100 draws");
}

BivariatePolynomial gen_conic(const Eigen::Vector2d& center, const Eigen::Vector2d& axes, double angle) {
  if (!(axes.x() > 0.0 && axes.y() > 0.0)) throw InputError("ellipse axes must be positive");
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double ia = 1.0 / (axes.x() * axes.x());
  const double ib = 1.0 / (axes.y() * axes.y());
  // Quadratic form [[A, B], [B, C]] of the rotated ellipse.
  const double A = c * c * ia + s * s * ib;
  const double C = s * s * ia + c * c * ib;
  const double B = c * s * (ia - ib);
  const double x0 = center.x();
  const double y0 = center.y();
  BivariatePolynomial p(2);
  p.set_coeff(2, 0, A);
  p.set_coeff(0, 2, C);
  p.set_coeff(1, 1, 2 * B);
  p.set_coeff(1, 0, -2 * (A * x0 + B * y0));
  p.set_coeff(0, 1, -2 * (B * x0 + C * y0));
  p.set_coeff(0, 0, A * x0 * x0 + 2 * B * x0 * y0 + C * y0 * y0 - 1.0);
  return p;
}

BivariatePolynomial gen_half_space(const Eigen::Vector2d& normal, double offset) {
  if (normal.norm() == 0.0) throw InputError("half-space normal must be nonzero");
  BivariatePolynomial p(1);
  p.set_coeff(1, 0, normal.x());
  p.set_coeff(0, 1, normal.y());
  p.set_coeff(0, 0, -offset);
  return p;
}

BivariatePolynomial gen_unbounded_quartic(std::uint64_t seed, const ImagePlane& plane) {
  plane.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double b0 = (unif(rng) < 0.5 ? -1.0 : 1.0) * (0.1 + 0.3 * unif(rng));
    const double b[5] = {b0, 0.5 * (2 * unif(rng) - 1), 0.5 * gauss(rng), 0.3 * gauss(rng), 0.3 * gauss(rng)};
    const double mu1 = 0.15 * gauss(rng);
    const double mu2 = 0.15 * gauss(rng);
    if (std::abs(mu1) + std::abs(mu2) > 0.5) continue;
    // p = y (1 + mu1 x + mu2 x^2) - h(x)
    BivariatePolynomial p(4);
    for (int i = 0; i <= 4; ++i) p.set_coeff(i, 0, -b[i]);
    p.set_coeff(0, 1, 1.0);
    p.set_coeff(1, 1, mu1);
    p.set_coeff(2, 1, mu2);
    bool ok = true;
    for (int s = 0; s <= 400 && ok; ++s) {
      const double x = -1.0 + s / 200.0;
      const double h = b[0] + x * (b[1] + x * (b[2] + x * (b[3] + x * b[4])));
      ok = std::abs(h / (1.0 + mu1 * x + mu2 * x * x)) <= 0.8;
    }
    if (!ok) continue;
    return normalized_inf(normalized_inf(p).rescaled(plane.half_width));
  }
  throw NumericalError("no admissible unbounded quartic after 100 draws");
}

double shoelace_area(const std::vector<Eigen::Vector2d>& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    s += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(s);
}

Raster rasterize_polygon(const std::vector<Eigen::Vector2d>& poly, const ImagePlane& plane, int resolution) {
  plane.validate();
  if (resolution < 1) throw InputError("resolution must be >= 1");
  Raster r;
  const int cells = static_cast<int>(std::lround(2.0 * plane.half_width * resolution));
  r.width = r.height = cells;
  r.pixel = 2.0 * plane.half_width / cells;
  r.x_min = -plane.half_width;
  r.y_max = plane.half_width;
  r.data.assign(static_cast<std::size_t>(cells) * cells, 0);
  std::vector<double> xs;
  for (int row = 0; row < cells; ++row) {
    const double y = r.y_center(row);
    xs.clear();
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const auto& a = poly[i];
      const auto& b = poly[(i + 1) % poly.size()];
      // Half-open rule so vertices on the scanline are counted once.
      if ((a.y() <= y) != (b.y() <= y)) xs.push_back(a.x() + (y - a.y()) * (b.x() - a.x()) / (b.y() - a.y()));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int c0 = std::max(0, static_cast<int>(std::ceil((xs[k] - r.x_min) / r.pixel - 0.5)));
      const int c1 = std::min(cells - 1, static_cast<int>(std::floor((xs[k + 1] - r.x_min) / r.pixel - 0.5)));
      for (int c = c0; c <= c1; ++c) r.data[static_cast<std::size_t>(row) * cells + c] = 1;
    }
  }
  return r;
}

namespace {

bool segments_cross(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2, const Eigen::Vector2d& q1,
                    const Eigen::Vector2d& q2) {
  auto orient = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  };
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

}  // namespace

BezierShape gen_bezier_shape(const std::array<Eigen::Vector2d, 4>& control, const ImagePlane& plane, int resolution,
                             int polyline_points) {
  plane.validate();
  if (polyline_points < 16 || polyline_points % 4 != 0) throw InputError("polyline size must be a multiple of 4, >= 16");
  double extent = 0.0;
  for (const auto& p : control) extent = std::max(extent, (p - control[0]).norm());
  const std::vector<Eigen::Vector2d> ctrl(control.begin(), control.end());
  if (extent < 1e-9 || shoelace_area(ctrl) < 1e-6 * extent * extent) {
    throw InputError("degenerate Bezier control points");
  }
  BezierShape out;
  out.control = control;
  for (int s = 0; s < 4; ++s) {
    const auto& P0 = control[s];
    const auto& P1 = control[(s + 1) % 4];
    const auto& P2 = control[(s + 2) % 4];
    const auto& P3 = control[(s + 3) % 4];
    out.segments.push_back({(P0 + 4 * P1 + P2) / 6.0, (2 * P1 + P2) / 3.0, (P1 + 2 * P2) / 3.0,
                            (P1 + 4 * P2 + P3) / 6.0});
  }
  const int per = polyline_points / 4;
  for (const auto& b : out.segments) {
    for (int k = 0; k < per; ++k) {
      const double t = static_cast<double>(k) / per;
      const double u = 1.0 - t;
      out.polyline.push_back(u * u * u * b[0] + 3 * u * u * t * b[1] + 3 * u * t * t * b[2] + t * t * t * b[3]);
    }
  }
  for (const auto& p : out.polyline) {
    if (std::abs(p.x()) >= plane.half_width || std::abs(p.y()) >= plane.half_width) {
      throw InputError("Bezier curve leaves the image plane");
    }
  }
  const std::size_t n = out.polyline.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
      if (segments_cross(out.polyline[i], out.polyline[(i + 1) % n], out.polyline[j], out.polyline[(j + 1) % n])) {
        throw InputError("Bezier boundary is self-intersecting");
      }
    }
  }
  out.polygon_area = shoelace_area(out.polyline);
  out.raster = rasterize_polygon(out.polyline, plane, resolution);
  return out;
}

int count_components(const Raster& raster) {
  std::vector<char> seen(raster.data.size(), 0);
  int count = 0;
  std::deque<std::pair<int, int>> queue;
  for (int r = 0; r < raster.height; ++r) {
    for (int c = 0; c < raster.width; ++c) {
      const std::size_t id = static_cast<std::size_t>(r) * raster.width + c;
      if (!raster.data[id] || seen[id]) continue;
      ++count;
      seen[id] = 1;
      queue.emplace_back(r, c);
      while (!queue.empty()) {
        const auto [y, x] = queue.front();
        queue.pop_front();
        const int dy[4] = {-1, 1, 0, 0};
        const int dx[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const int ny = y + dy[k];
          const int nx = x + dx[k];
          if (ny < 0 || nx < 0 || ny >= raster.height || nx >= raster.width) continue;
          const std::size_t nid = static_cast<std::size_t>(ny) * raster.width + nx;
          if (raster.data[nid] && !seen[nid]) {
            seen[nid] = 1;
            queue.emplace_back(ny, nx);
          }
        }
      }
    }
  }
  return count;
}

nlohmann::json fixture_manifest(const std::string& kind, const nlohmann::json& parameters, const std::string& description,
                                const std::vector<std::string>& files) {
  return {{"kind", kind}, {"parameters", parameters}, {"description", description}, {"files", files}};
}

}  // namespace algshape
