#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace algshape {

/// Number of monomials x^i y^j with i + j <= degree.
constexpr int monomial_count(int degree) { return (degree + 1) * (degree + 2) / 2; }

/// Canonical graded ordering: total degree first, then i ascending.
/// Index 0 is the constant term.
constexpr int monomial_index(int i, int j) {
  const int d = i + j;
  return d * (d + 1) / 2 + i;
}

/// Exponents (i, j) of the monomial at a canonical index.
std::pair<int, int> monomial_exponents(int index);

/// p(x, y) = sum a_{i,j} x^i y^j over i + j <= degree. The degree is
/// structural: trailing zero coefficients do not lower it.
class BivariatePolynomial {
 public:
  BivariatePolynomial() : BivariatePolynomial(0) {}
  explicit BivariatePolynomial(int degree);
  BivariatePolynomial(int degree, Eigen::VectorXd coeffs);

  int degree() const { return degree_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }

  double coeff(int i, int j) const { return coeffs_[monomial_index(i, j)]; }
  void set_coeff(int i, int j, double value) { coeffs_[monomial_index(i, j)] = value; }

  /// Nested Horner evaluation.
  double operator()(double x, double y) const;
  /// (dp/dx, dp/dy)
  std::pair<double, double> gradient(double x, double y) const;

  /// Coefficients of the univariate polynomial q(x) = p(x, y) for fixed y,
  /// lowest power first.
  Eigen::VectorXd restrict_to_row(double y) const;

  /// Same polynomial embedded in a higher structural degree.
  BivariatePolynomial with_degree(int degree) const;
  /// p(x / s, y / s)
  BivariatePolynomial rescaled(double s) const;

  BivariatePolynomial operator*(double c) const;
  BivariatePolynomial operator-() const { return *this * -1.0; }

 private:
  int degree_;
  Eigen::VectorXd coeffs_;
};

BivariatePolynomial operator*(double c, const BivariatePolynomial& p);

inline double evaluate(const BivariatePolynomial& p, double x, double y) { return p(x, y); }

/// Image plane Omega = [-L, L]^2 with lattice period T.
struct ImagePlane {
  double half_width = 1.0;
  double period = 1.0;

  /// Throws InputError unless L > 0, T > 0 and 2L/T is an integer.
  void validate() const;
};

/// Row-major binary raster over a plane. Row 0 is the top (largest y).
struct Raster {
  int width = 0;
  int height = 0;
  double x_min = 0.0;
  double y_max = 0.0;
  double pixel = 1.0;  // pixel edge length
  std::vector<std::uint8_t> data;

  std::uint8_t at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
  double x_center(int col) const { return x_min + (col + 0.5) * pixel; }
  double y_center(int row) const { return y_max - (row + 0.5) * pixel; }
  std::size_t count() const;
};

/// 1 where p <= 0, sampled at pixel centers, `resolution` pixels per unit.
Raster render_shape(const BivariatePolynomial& p, const ImagePlane& plane, int resolution);

void write_pgm(const Raster& raster, const std::string& path);
Raster read_pgm(const std::string& path, double x_min, double y_max, double pixel);
void write_raster_csv(const Raster& raster, const std::string& path);

/// Translation map b = B a, where b are the coefficients of p(x + x0, y + y0).
struct ShiftMatrix {
  double x0 = 0.0;
  double y0 = 0.0;
  int degree = 0;
  Eigen::MatrixXd entries;

  BivariatePolynomial apply(const BivariatePolynomial& p) const;
};

ShiftMatrix shift_matrix(int degree, double x0, double y0);

/// Boundary points of {p = 0} inside the plane: sign changes on a uniform
/// `grid`-per-axis lattice, each refined by `bisections` bisection steps.
std::vector<Eigen::Vector2d> zero_set_points(const BivariatePolynomial& p, const ImagePlane& plane,
                                             int grid = 512, int bisections = 30);

/// One-sided Hausdorff distance from {p = 0} to {q = 0}, both clipped to the
/// plane. nullopt when {p = 0} has no sign change on the scan grid; +inf when
/// {q = 0} is empty but {p = 0} is not.
std::optional<double> zero_set_distance(const BivariatePolynomial& p, const BivariatePolynomial& q,
                                        const ImagePlane& plane, int grid = 512);

nlohmann::json to_json(const BivariatePolynomial& p);
BivariatePolynomial polynomial_from_json(const nlohmann::json& j);
BivariatePolynomial load_polynomial(const std::string& path);
void save_polynomial(const BivariatePolynomial& p, const std::string& path);

}  // namespace algshape
