#include "algshape/bspline.hpp"

#include "algshape/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace algshape {

BSplineKernel::BSplineKernel(int order) : order_(order) {
  if (order < 0) throw InputError("B-spline order must be nonnegative");
}

namespace {

double box(double x) {
  const double a = std::abs(x);
  if (a < 0.5) return 1.0;
  if (a == 0.5) return 0.5;
  return 0.0;
}

/// Centered B-spline of order m by the two-term recurrence
/// beta_j(y) = [((j+1)/2 + y) beta_{j-1}(y + 1/2) + ((j+1)/2 - y) beta_{j-1}(y - 1/2)] / j.
double bspline_value(int m, double x) {
  if (std::abs(x) >= 0.5 * (m + 1)) return m == 0 ? box(x) : 0.0;
  // level j holds beta_j(x + t_q), t_q = -(m - j)/2 + q, q = 0..m-j
  double v[64] = {};
  double* vals = v;
  std::vector<double> heap;
  if (m + 1 > 64) {
    heap.resize(m + 1);
    vals = heap.data();
  }
  for (int q = 0; q <= m; ++q) vals[q] = box(x - 0.5 * m + q);
  for (int j = 1; j <= m; ++j) {
    const double half = 0.5 * (j + 1);
    for (int q = 0; q <= m - j; ++q) {
      const double y = x - 0.5 * (m - j) + q;
      vals[q] = ((half + y) * vals[q + 1] + (half - y) * vals[q]) / j;
    }
  }
  return vals[0];
}

}  // namespace

double BSplineKernel::operator()(double x) const { return bspline_value(order_, x); }

double BSplineKernel::derivative(double x) const {
  if (order_ == 0) throw InputError("the order-0 B-spline has no pointwise derivative");
  return bspline_value(order_ - 1, x + 0.5) - bspline_value(order_ - 1, x - 0.5);
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw InputError("Gauss-Legendre rule needs at least one node");
  std::vector<double> x(n);
  std::vector<double> w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

double integrate_on_knots(const BSplineKernel& kernel, double lo, double hi, int nodes,
                          const std::function<double(double)>& f) {
  if (!(hi > lo)) return 0.0;
  const auto [gx, gw] = gauss_legendre(nodes);
  const double off = kernel.knot_offset();
  double a = lo;
  double total = 0.0;
  while (a < hi) {
    double b = std::floor(a - off + 1.0) + off;
    if (b <= a) b += 1.0;
    b = std::min(b, hi);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double piece = 0.0;
    for (int q = 0; q < nodes; ++q) piece += gw[q] * f(mid + half * gx[q]);
    total += half * piece;
    a = b;
  }
  return total;
}

double gram_integrals(const BSplineKernel& kernel, int weight_power, std::pair<bool, bool> deriv_flags, int k,
                      int l) {
  if (weight_power < 0) throw InputError("weight power must be nonnegative");
  const double h = kernel.half_support();
  const double lo = std::max(k, l) - h;
  const double hi = std::min(k, l) + h;
  if (hi <= lo) return 0.0;
  const int m = kernel.order();
  const int nodes = (2 * m + weight_power + 2 + 1) / 2;
  auto factor = [&](bool d, double t) { return d ? kernel.derivative(t) : kernel(t); };
  return integrate_on_knots(kernel, lo, hi, std::max(nodes, 1), [&](double x) {
    return std::pow(x, weight_power) * factor(deriv_flags.first, x - k) * factor(deriv_flags.second, x - l);
  });
}

double kernel_moment(const BSplineKernel& kernel, int r) {
  const double h = kernel.half_support();
  const int nodes = (kernel.order() + r + 2) / 2 + 1;
  return integrate_on_knots(kernel, -h, h, nodes, [&](double t) { return std::pow(t, r) * kernel(t); });
}

ClassicalReproduction classical_coefficients(const BSplineKernel& kernel, int order, int k_min, int k_max) {
  if (order < 0) throw InputError("reproduction order must be nonnegative");
  if (order > kernel.order()) {
    throw InputError("a B-spline of order " + std::to_string(kernel.order()) +
                     " reproduces monomials only up to degree " + std::to_string(kernel.order()));
  }
  if (k_max < k_min) throw InputError("empty index range");

  // sum_k k^j beta(x - k) = sum_r C(j, r) (-1)^r mu_r x^(j - r); invert the
  // unit lower-triangular map from k-powers to x-powers.
  const int n = order + 1;
  std::vector<double> mu(n);
  for (int r = 0; r < n; ++r) mu[r] = r % 2 ? 0.0 : kernel_moment(kernel, r);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);  // T(j, s): coefficient of x^s in sum_k k^j beta
  for (int j = 0; j < n; ++j) {
    double binom = 1.0;
    for (int r = 0; r <= j; ++r) {
      T(j, j - r) = binom * (r % 2 ? -1.0 : 1.0) * mu[r];
      binom = binom * (j - r) / (r + 1);
    }
  }
  const Eigen::MatrixXd alpha =
      T.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));  // c^(i)(k) = sum_j alpha(i,j) k^j

  ClassicalReproduction out;
  out.m = kernel.order();
  out.order = order;
  out.k_min = k_min;
  out.k_max = k_max;
  out.table.resize(n, k_max - k_min + 1);
  for (int k = k_min; k <= k_max; ++k) {
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = i; j >= 0; --j) acc = acc * k + alpha(i, j);
      out.table(i, k - k_min) = acc;
    }
  }
  return out;
}

nlohmann::json to_json(const ClassicalReproduction& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i <= r.order; ++i) {
    std::vector<double> row(r.table.cols());
    for (int c = 0; c < r.table.cols(); ++c) row[c] = r.table(i, c);
    rows.push_back(row);
  }
  return {{"m", r.m}, {"N", r.order}, {"k_min", r.k_min}, {"rows", rows}};
}

ClassicalReproduction classical_from_json(const nlohmann::json& j) {
  try {
    ClassicalReproduction r;
    r.m = j.at("m").get<int>();
    r.order = j.at("N").get<int>();
    r.k_min = j.at("k_min").get<int>();
    const auto& rows = j.at("rows");
    if (static_cast<int>(rows.size()) != r.order + 1 || rows.empty()) throw InputError("row count must be N + 1");
    const int cols = static_cast<int>(rows[0].size());
    r.k_max = r.k_min + cols - 1;
    r.table.resize(r.order + 1, cols);
    for (int i = 0; i <= r.order; ++i) {
      if (static_cast<int>(rows[i].size()) != cols) throw InputError("ragged coefficient rows");
      for (int c = 0; c < cols; ++c) r.table(i, c) = rows[i][c].get<double>();
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed reproduction JSON: ") + e.what());
  }
}

}  // namespace algshape
