#include "algshape/moments.hpp"

#include "algshape/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace algshape {

std::string to_string(MomentKind k) {
  switch (k) {
    case MomentKind::Conventional:
      return "conventional";
    case MomentKind::GG:
      return "g.g";
    case MomentKind::GpG:
      return "g'.g";
    case MomentKind::GGp:
      return "g.g'";
  }
  return "unknown";
}

MomentKind moment_kind_from_string(const std::string& s) {
  if (s == "conventional") return MomentKind::Conventional;
  if (s == "g.g") return MomentKind::GG;
  if (s == "g'.g") return MomentKind::GpG;
  if (s == "g.g'") return MomentKind::GGp;
  throw InputError("unknown moment kind '" + s + "'");
}

namespace {

Eigen::MatrixXd power_scaled(const Eigen::MatrixXd& core, double T, int offset) {
  Eigen::MatrixXd out = core;
  for (int i = 0; i < out.rows(); ++i) {
    for (int j = 0; j < out.cols(); ++j) out(i, j) *= std::pow(T, i + j + offset);
  }
  return out;
}

}  // namespace

MomentTable moments_from_samples(const SampleGrid& grid, const ClassicalReproduction& repro, int max_i, int max_j) {
  if (max_i < 0 || max_j < 0) throw InputError("moment orders must be nonnegative");
  if (std::max(max_i, max_j) > repro.order) {
    throw InputError("moment order " + std::to_string(std::max(max_i, max_j)) + " exceeds reproduction order " +
                     std::to_string(repro.order));
  }
  if (repro.m != grid.m) throw InputError("reproduction coefficients belong to a different kernel");
  auto covered = [&](IndexRange r) { return r.lo >= repro.k_min && r.hi <= repro.k_max; };
  if (!covered(grid.k_range) || !covered(grid.l_range)) {
    throw InputError("reproduction coefficients do not cover the sample index range");
  }
  const Eigen::MatrixXd Ck = repro.table.block(0, grid.k_range.lo - repro.k_min, max_i + 1, grid.k_range.size());
  const Eigen::MatrixXd Cl = repro.table.block(0, grid.l_range.lo - repro.k_min, max_j + 1, grid.l_range.size());
  MomentTable t;
  t.kind = MomentKind::Conventional;
  t.max_i = max_i;
  t.max_j = max_j;
  t.values = power_scaled(Ck * grid.values * Cl.transpose(), grid.plane.period, 2);
  return t;
}

GeneralizedMoments generalized_moments_from_samples(const SampleGrid& grid, const GMCoefficients& coefs, int max_i,
                                                    int max_j, int kc, int lc) {
  if (max_i < 0 || max_j < 0) throw InputError("moment orders must be nonnegative");
  if (std::max(max_i, max_j) > coefs.P) throw InputError("moment order exceeds the fitted order P");
  if (coefs.m != grid.m) throw InputError("generalized coefficients belong to a different kernel");
  const int K = coefs.K;
  if (!grid.k_range.contains(kc - K) || !grid.k_range.contains(kc + K) || !grid.l_range.contains(lc - K) ||
      !grid.l_range.contains(lc + K)) {
    throw InputError("window centered at (" + std::to_string(kc) + ", " + std::to_string(lc) +
                     ") leaves the sample grid");
  }
  const int w = coefs.window();
  const Eigen::MatrixXd D = grid.values.block(kc - K - grid.k_range.lo, lc - K - grid.l_range.lo, w, w);
  const Eigen::MatrixXd Ci = coefs.c.topRows(max_i + 1);
  const Eigen::MatrixXd Cj = coefs.c.topRows(max_j + 1);
  const Eigen::MatrixXd Ti = coefs.c_tilde.topRows(max_i + 1);
  const Eigen::MatrixXd Tj = coefs.c_tilde.topRows(max_j + 1);
  const double T = grid.plane.period;

  GeneralizedMoments out;
  auto fill = [&](MomentTable& t, MomentKind kind, const Eigen::MatrixXd& core, int offset) {
    t.kind = kind;
    t.max_i = max_i;
    t.max_j = max_j;
    t.x0 = kc * T;
    t.y0 = lc * T;
    t.values = power_scaled(core, T, offset);
  };
  fill(out.gg, MomentKind::GG, Ci * D * Cj.transpose(), 2);
  fill(out.gpg, MomentKind::GpG, Ti * D * Cj.transpose(), 1);
  fill(out.ggp, MomentKind::GGp, Ci * D * Tj.transpose(), 1);
  return out;
}

std::vector<double> real_roots_in(const Eigen::VectorXd& q, double lo, double hi) {
  int deg = static_cast<int>(q.size()) - 1;
  const double scale = q.size() ? q.cwiseAbs().maxCoeff() : 0.0;
  while (deg >= 0 && std::abs(q[deg]) <= 1e-14 * scale) --deg;
  std::vector<double> roots;
  if (deg <= 0) return roots;
  auto value = [&](double x, double& dv) {
    double v = 0.0;
    dv = 0.0;
    for (int i = deg; i >= 0; --i) {
      dv = dv * x + v;
      v = v * x + q[i];
    }
    return v;
  };
  if (deg == 1) {
    roots.push_back(-q[0] / q[1]);
  } else {
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -q[i] / q[deg];
    const Eigen::VectorXcd ev = comp.eigenvalues();
    for (int i = 0; i < deg; ++i) {
      if (std::abs(ev[i].imag()) > 1e-7 * (1.0 + std::abs(ev[i].real()))) continue;
      double x = ev[i].real();
      for (int it = 0; it < 3; ++it) {
        double dv;
        const double v = value(x, dv);
        if (dv == 0.0) break;
        const double nx = x - v / dv;
        if (!std::isfinite(nx) || std::abs(nx - x) > 1e-6 * (1.0 + std::abs(x))) break;
        x = nx;
      }
      roots.push_back(x);
    }
  }
  std::vector<double> inside;
  for (double r : roots) {
    if (r > lo && r < hi) inside.push_back(r);
  }
  std::sort(inside.begin(), inside.end());
  return inside;
}

namespace {

double poly_value(const Eigen::VectorXd& q, double x) {
  double v = 0.0;
  for (int i = static_cast<int>(q.size()) - 1; i >= 0; --i) v = v * x + q[i];
  return v;
}

/// Intervals of [lo, hi] on which q <= 0.
std::vector<std::pair<double, double>> inside_intervals(const Eigen::VectorXd& q, double lo, double hi) {
  std::vector<double> cuts{lo};
  for (double r : real_roots_in(q, lo, hi)) cuts.push_back(r);
  cuts.push_back(hi);
  std::vector<std::pair<double, double>> out;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double a = cuts[s];
    const double b = cuts[s + 1];
    if (b <= a) continue;
    if (poly_value(q, 0.5 * (a + b)) <= 0.0) {
      if (!out.empty() && out.back().second == a) {
        out.back().second = b;
      } else {
        out.emplace_back(a, b);
      }
    }
  }
  return out;
}

/// One-dimensional weight in local coordinates u = (x - center) / T.
struct AxisWeight {
  const GMCoefficients* coefs = nullptr;
  bool derivative = false;
  double center = 0.0;
  double T = 1.0;

  bool trivial() const { return coefs == nullptr; }
  double operator()(double x) const {
    const double u = (x - center) / T;
    return derivative ? coefs->g_derivative(u) / T : coefs->g(u);
  }
};

/// Accumulates out[i] += int_a^b xl^i w(x) dx (or |xl|^i |w|) with xl = x - center.
void integrate_axis(double a, double b, const AxisWeight& w, int max_i, bool absolute, Eigen::VectorXd& out) {
  if (w.trivial()) {
    auto add = [&](double lo, double hi, double sign) {
      for (int i = 0; i <= max_i; ++i) out[i] += sign * (std::pow(hi, i + 1) - std::pow(lo, i + 1)) / (i + 1);
    };
    const double lo = a - w.center;
    const double hi = b - w.center;
    if (!absolute) {
      add(lo, hi, 1.0);
      return;
    }
    // |x|^i: split at zero and flip odd powers on the negative side.
    if (hi <= 0.0) {
      for (int i = 0; i <= max_i; ++i) out[i] += (std::pow(-lo, i + 1) - std::pow(-hi, i + 1)) / (i + 1);
    } else if (lo >= 0.0) {
      add(lo, hi, 1.0);
    } else {
      for (int i = 0; i <= max_i; ++i) out[i] += (std::pow(-lo, i + 1) + std::pow(hi, i + 1)) / (i + 1);
    }
    return;
  }
  const BSplineKernel kernel(w.coefs->m);
  const int nodes = (w.coefs->m + max_i) / 2 + 3;
  const auto [gx, gw] = gauss_legendre(nodes);
  // Breakpoints: kernel knots in physical units, plus the window center for |x|.
  std::vector<double> cuts{a, b};
  const double off = kernel.knot_offset();
  for (double t = std::ceil((a - w.center) / w.T - off) + off; w.center + t * w.T < b; t += 1.0) {
    cuts.push_back(w.center + t * w.T);
  }
  if (absolute && w.center > a && w.center < b) cuts.push_back(w.center);
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double lo = cuts[s];
    const double hi = cuts[s + 1];
    if (hi <= lo) continue;
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (int q = 0; q < nodes; ++q) {
      const double x = mid + half * gx[q];
      double wx = w(x);
      double xl = x - w.center;
      if (absolute) {
        wx = std::abs(wx);
        xl = std::abs(xl);
      }
      double p = half * gw[q] * wx;
      for (int i = 0; i <= max_i; ++i) {
        out[i] += p;
        p *= xl;
      }
    }
  }
}

}  // namespace

MomentTable oracle_moments(const BivariatePolynomial& p, const ImagePlane& plane, const MomentWeight& weight,
                           int max_i, int max_j, const OracleOptions& options) {
  plane.validate();
  if (max_i < 0 || max_j < 0) throw InputError("moment orders must be nonnegative");
  if (weight.kind != MomentKind::Conventional && weight.coefs == nullptr) {
    throw InputError("generalized moment oracle needs coefficient sets");
  }
  const double L = plane.half_width;
  const double T = plane.period;
  AxisWeight wx;
  AxisWeight wy;
  wx.center = weight.x0;
  wy.center = weight.y0;
  if (weight.kind != MomentKind::Conventional) {
    wx.coefs = wy.coefs = weight.coefs;
    wx.T = wy.T = T;
    wx.derivative = weight.kind == MomentKind::GpG;
    wy.derivative = weight.kind == MomentKind::GGp;
  }

  const int rows = static_cast<int>(std::lround(2.0 * L * options.rows_per_unit));
  const double h = 2.0 * L / rows;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(max_i + 1, max_j + 1);
  Eigen::VectorXd X(max_i + 1);
  Eigen::VectorXd Y(max_j + 1);
  for (int r = 0; r < rows; ++r) {
    const double y = -L + (r + 0.5) * h;
    double wyv = 1.0;
    if (!wy.trivial()) {
      wyv = wy(y);
      if (wyv == 0.0) continue;
    }
    const auto runs = inside_intervals(p.restrict_to_row(y), -L, L);
    if (runs.empty()) continue;
    X.setZero();
    for (const auto& [a, b] : runs) integrate_axis(a, b, wx, max_i, options.absolute, X);
    double yl = y - wy.center;
    if (options.absolute) {
      yl = std::abs(yl);
      wyv = std::abs(wyv);
    }
    double yp = h * wyv;
    for (int j = 0; j <= max_j; ++j) {
      Y[j] = yp;
      yp *= yl;
    }
    acc += X * Y.transpose();
  }
  MomentTable t;
  t.kind = weight.kind;
  t.max_i = max_i;
  t.max_j = max_j;
  t.x0 = weight.x0;
  t.y0 = weight.y0;
  t.values = acc;
  return t;
}

nlohmann::json to_json(const MomentTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i <= t.max_i; ++i) {
    std::vector<double> row(t.max_j + 1);
    for (int j = 0; j <= t.max_j; ++j) row[j] = t.values(i, j);
    rows.push_back(row);
  }
  return {{"kind", to_string(t.kind)},
          {"order", {t.max_i, t.max_j}},
          {"center", {t.x0, t.y0}},
          {"values", rows}};
}

MomentTable moment_table_from_json(const nlohmann::json& j) {
  try {
    MomentTable t;
    t.kind = moment_kind_from_string(j.at("kind").get<std::string>());
    t.max_i = j.at("order")[0].get<int>();
    t.max_j = j.at("order")[1].get<int>();
    t.x0 = j.at("center")[0].get<double>();
    t.y0 = j.at("center")[1].get<double>();
    const auto& rows = j.at("values");
    if (static_cast<int>(rows.size()) != t.max_i + 1) throw InputError("moment rows do not match order");
    t.values.resize(t.max_i + 1, t.max_j + 1);
    for (int i = 0; i <= t.max_i; ++i) {
      if (static_cast<int>(rows[i].size()) != t.max_j + 1) throw InputError("moment columns do not match order");
      for (int c = 0; c <= t.max_j; ++c) t.values(i, c) = rows[i][c].get<double>();
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed moment JSON: ") + e.what());
  }
}

}  // namespace algshape
