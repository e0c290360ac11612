#pragma once

#include "algshape/poly2d.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace algshape {

/// Random degree-4 polynomial with a bounded, nonempty sublevel set that fits
/// in the disk of radius fill * L. The leading form is q1^2 + q2^2 + eta (x^4 + y^4)
/// with random quadratic forms q1, q2 and eta > 0. Shapes whose boundary
/// passes within 0.05 (unit frame) of the origin are resampled, so a_00 != 0.
BivariatePolynomial gen_bounded_quartic(std::uint64_t seed, const ImagePlane& plane, double fill = 0.6);

/// Ellipse ((u/a)^2 + (v/b)^2 - 1) with u, v the rotated offsets from center.
BivariatePolynomial gen_conic(const Eigen::Vector2d& center, const Eigen::Vector2d& axes, double angle);

/// nx x + ny y - offset.
BivariatePolynomial gen_half_space(const Eigen::Vector2d& normal, double offset);

/// Degree-4 curve y = h(x) / (1 + small terms) crossing the plane from left to
/// right; the shape is the region below it, so it touches the plane border.
BivariatePolynomial gen_unbounded_quartic(std::uint64_t seed, const ImagePlane& plane);

/// Minimum of the degree-4 leading form over `directions` unit directions.
double leading_form_min(const BivariatePolynomial& p, int directions = 720);

struct BezierShape {
  std::array<Eigen::Vector2d, 4> control;
  std::vector<std::array<Eigen::Vector2d, 4>> segments;  // cubic Bezier pieces
  std::vector<Eigen::Vector2d> polyline;                 // closed, first point not repeated
  Raster raster;
  double polygon_area = 0.0;  // shoelace area of the polyline
};

/// Closed smooth curve from four control points: the periodic cubic B-spline
/// of the control polygon, written as four Bezier segments. Throws InputError
/// for degenerate or self-intersecting input, or a curve leaving the plane.
BezierShape gen_bezier_shape(const std::array<Eigen::Vector2d, 4>& control, const ImagePlane& plane,
                             int resolution = 256, int polyline_points = 1024);

/// Even-odd scanline fill of a closed polyline at pixel centers.
Raster rasterize_polygon(const std::vector<Eigen::Vector2d>& polygon, const ImagePlane& plane, int resolution);

double shoelace_area(const std::vector<Eigen::Vector2d>& polygon);

/// Number of 4-connected components of the 1-pixels.
int count_components(const Raster& raster);

/// Manifest entry describing a generated fixture.
nlohmann::json fixture_manifest(const std::string& kind, const nlohmann::json& parameters, const std::string& description,
                                const std::vector<std::string>& files);

}  // namespace algshape
