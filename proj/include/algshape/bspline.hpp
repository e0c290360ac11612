#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace algshape {

/// Centered B-spline of order m: the (m+1)-fold convolution of the unit box.
/// Piecewise polynomial of degree m supported on [-(m+1)/2, (m+1)/2] with
/// knots at integers (m odd) or half-integers (m even).
class BSplineKernel {
 public:
  explicit BSplineKernel(int order);

  int order() const { return order_; }
  double half_support() const { return 0.5 * (order_ + 1); }

  double operator()(double x) const;
  /// Derivative via beta'_m(x) = beta_{m-1}(x + 1/2) - beta_{m-1}(x - 1/2).
  /// Throws InputError for m = 0.
  double derivative(double x) const;

  /// Knot offset: 0.5 for even orders, 0 for odd ones. Knots of every
  /// integer shift of the kernel lie on offset + Z.
  double knot_offset() const { return order_ % 2 == 0 ? 0.5 : 0.0; }

 private:
  int order_;
};

inline double eval(const BSplineKernel& k, double x) { return k(x); }
inline double eval_derivative(const BSplineKernel& k, double x) { return k.derivative(x); }

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

/// Integrates f over [lo, hi] by splitting at the kernel knot lattice and using
/// `nodes` Gauss-Legendre points per piece; exact for piecewise polynomials of
/// degree <= 2 nodes - 1 with those breakpoints.
double integrate_on_knots(const BSplineKernel& kernel, double lo, double hi, int nodes,
                          const std::function<double(double)>& f);

/// Exact integral of x^w * D^{f1} beta(x - k) * D^{f2} beta(x - l).
double gram_integrals(const BSplineKernel& kernel, int weight_power, std::pair<bool, bool> deriv_flags, int k,
                      int l);

/// Moment integral of the kernel, int t^r beta(t) dt.
double kernel_moment(const BSplineKernel& kernel, int r);

/// Coefficients c_k^(i) with sum_k c_k^(i) beta(x - k) = x^i, i = 0..order,
/// for k in [k_min, k_max]. The identity is exact wherever every kernel
/// overlapping x lies within the range.
struct ClassicalReproduction {
  int m = 0;
  int order = 0;
  int k_min = 0;
  int k_max = 0;
  Eigen::MatrixXd table;  // (order + 1) x (k_max - k_min + 1), table(i, k - k_min)

  double c(int i, int k) const { return table(i, k - k_min); }
  int count() const { return k_max - k_min + 1; }
};

/// Throws InputError when order > m (a degree-m spline cannot reproduce it).
ClassicalReproduction classical_coefficients(const BSplineKernel& kernel, int order, int k_min, int k_max);

nlohmann::json to_json(const ClassicalReproduction& r);
ClassicalReproduction classical_from_json(const nlohmann::json& j);

}  // namespace algshape
