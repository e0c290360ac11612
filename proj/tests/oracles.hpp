#pragma once

// Reference computations written independently of the library: closed-form
// B-splines, Gauss-Legendre by Newton iteration, analytic disk moments.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

/// Centered B-spline of order m from the truncated-power formula, evaluated
/// on the left half where the alternating sum cancels least.
inline double bspline(int m, double x) {
  const double h = 0.5 * (m + 1);
  x = -std::abs(x);
  if (x <= -h || x >= h) return 0.0;
  if (m == 0) return 1.0;
  double acc = 0.0;
  for (int k = 0; k <= m + 1; ++k) {
    const double t = x + h - k;
    if (t > 0.0) acc += (k % 2 ? -1.0 : 1.0) * binomial(m + 1, k) * std::pow(t, m);
  }
  return acc / factorial(m);
}

/// Derivative of the truncated-power formula.
inline double bspline_derivative(int m, double x) {
  const double h = 0.5 * (m + 1);
  if (m == 0 || x <= -h || x >= h) return 0.0;
  if (x > 0.0) return -bspline_derivative(m, -x);
  double acc = 0.0;
  for (int k = 0; k <= m + 1; ++k) {
    const double t = x + h - k;
    if (t > 0.0) acc += (k % 2 ? -1.0 : 1.0) * binomial(m + 1, k) * m * std::pow(t, m - 1);
  }
  return acc / factorial(m);
}

/// Nodes and weights on [-1, 1], Newton iteration on P_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

/// Composite Gauss rule on cells of width `step`.
inline double integrate(const std::function<double(double)>& f, double lo, double hi, double step, int nodes = 8) {
  const auto [x, w] = gauss(nodes);
  const int cells = std::max(1, static_cast<int>(std::lround((hi - lo) / step)));
  const double h = (hi - lo) / cells;
  double acc = 0.0;
  for (int c = 0; c < cells; ++c) {
    const double mid = lo + (c + 0.5) * h;
    for (int q = 0; q < nodes; ++q) acc += w[q] * f(mid + 0.5 * h * x[q]);
  }
  return 0.5 * h * acc;
}

/// int int_{disk radius R at the origin} x^i y^j, exact.
inline double disk_moment(double R, int i, int j) {
  if (i % 2 || j % 2) return 0.0;
  // R^(i+j+2) / (i+j+2) * int_0^2pi cos^i sin^j, with the Beta function.
  const double angular = 2.0 * std::tgamma((i + 1) / 2.0) * std::tgamma((j + 1) / 2.0) / std::tgamma((i + j + 2) / 2.0);
  return std::pow(R, i + j + 2) / (i + j + 2) * angular;
}

}  // namespace oracle
