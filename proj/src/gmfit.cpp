#include "algshape/gmfit.hpp"

#include "algshape/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace algshape {

namespace {

double expand(const Eigen::MatrixXd& table, int i, int K, int m, double x, bool derivative) {
  const BSplineKernel kernel(m);
  const double h = kernel.half_support();
  const int lo = std::max(-K, static_cast<int>(std::ceil(x - h)));
  const int hi = std::min(K, static_cast<int>(std::floor(x + h)));
  double acc = 0.0;
  for (int k = lo; k <= hi; ++k) {
    const double c = table(i, k + K);
    if (c != 0.0) acc += c * (derivative ? kernel.derivative(x - k) : kernel(x - k));
  }
  return acc;
}

/// One summand of a residual function: scale * x^xpow * sum_k u_k D^deriv beta(x - k),
/// with u the coefficient row `row` of either c (tilde = false) or ct.
struct Term {
  bool tilde;
  int row;
  double scale;
  int xpow;
  bool deriv;
};

struct Residual {
  std::vector<Term> terms;
  int order;       // i
  bool c_chain;    // c-chain residuals carry weight s^-2i, the others s^(2-2i)
};

std::vector<Residual> residual_terms(int P) {
  std::vector<Residual> out;
  for (int i = 1; i <= P; ++i) out.push_back({{{false, i, 1.0, 0, false}, {false, i - 1, -1.0, 1, false}}, i, true});
  for (int i = 1; i <= P; ++i) out.push_back({{{true, i, 1.0, 0, false}, {true, i - 1, -1.0, 1, false}}, i, false});
  for (int i = 0; i <= P; ++i) {
    std::vector<Term> t{{false, i, 1.0, 0, true}, {true, i, -1.0, 0, false}};
    if (i >= 1) t.push_back({false, i - 1, -static_cast<double>(i), 0, false});
    out.push_back({t, i, false});
  }
  return out;
}

/// Weight of a residual when G is measured in the coordinate x / s.
double residual_weight(const Residual& r, double s) {
  return std::pow(s, r.c_chain ? -2.0 * r.order : 2.0 - 2.0 * r.order);
}

}  // namespace

double GMCoefficients::reproduce(int i, double x) const { return expand(c, i, K, m, x, false); }
double GMCoefficients::reproduce_tilde(int i, double x) const { return expand(c_tilde, i, K, m, x, false); }
double GMCoefficients::g_derivative(double x) const { return expand(c, 0, K, m, x, true); }

Eigen::VectorXd GMProblem::pack(const GMCoefficients& coefs) const {
  const int n = 2 * K + 1;
  Eigen::VectorXd v(2 * (P + 1) * n);
  for (int i = 0; i <= P; ++i) {
    for (int k = 0; k < n; ++k) {
      v[i * n + k] = coefs.c(i, k) / scale[i * n + k];
      v[(P + 1 + i) * n + k] = coefs.c_tilde(i, k) / scale[(P + 1 + i) * n + k];
    }
  }
  return v;
}

GMCoefficients GMProblem::unpack(const Eigen::VectorXd& v) const {
  const int n = 2 * K + 1;
  GMCoefficients out;
  out.m = m;
  out.P = P;
  out.K = K;
  out.c.resize(P + 1, n);
  out.c_tilde.resize(P + 1, n);
  for (int i = 0; i <= P; ++i) {
    for (int k = 0; k < n; ++k) {
      out.c(i, k) = v[i * n + k] * scale[i * n + k];
      out.c_tilde(i, k) = v[(P + 1 + i) * n + k] * scale[(P + 1 + i) * n + k];
    }
  }
  return out;
}

GMProblem build_gm_objective(const BSplineKernel& kernel, int P, int K, double grid_step) {
  if (P < 1) throw InputError("generalized moment order P must be >= 1");
  if (K < 0) throw InputError("index set half-width K must be >= 0");
  if (kernel.order() < 1) throw InputError("the objective needs a differentiable kernel (m >= 1)");
  if (!(grid_step > 0.0)) throw InputError("grid step must be positive");

  const int m = kernel.order();
  const int n = 2 * K + 1;
  const int blocks = 2 * (P + 1);
  const int dim = blocks * n;
  GMProblem pb;
  pb.m = m;
  pb.P = P;
  pb.K = K;

  // Gram tables indexed by (weight power, f1, f2) and (k, l).
  const int reach = m + 1;
  auto slot = [](int w, bool f1, bool f2) { return w * 4 + (f1 ? 2 : 0) + (f2 ? 1 : 0); };
  std::vector<Eigen::MatrixXd> gram(12, Eigen::MatrixXd::Zero(n, n));
  for (int w = 0; w <= 2; ++w) {
    for (int f = 0; f < 4; ++f) {
      const bool f1 = f & 2;
      const bool f2 = f & 1;
      if (w == 2 && (f1 || f2)) continue;
      if (w == 1 && f1 && f2) continue;
      Eigen::MatrixXd& G = gram[slot(w, f1, f2)];
      for (int k = -K; k <= K; ++k) {
        for (int l = std::max(-K, k - reach); l <= std::min(K, k + reach); ++l) {
          G(k + K, l + K) = gram_integrals(kernel, w, {f1, f2}, k, l);
        }
      }
    }
  }

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  auto block_of = [&](const Term& t) { return (t.tilde ? P + 1 + t.row : t.row) * n; };
  const double s = gm_coordinate_scale(K);
  for (const auto& res : residual_terms(P)) {
    const double w = residual_weight(res, s);
    for (const Term& a : res.terms) {
      for (const Term& b : res.terms) {
        const Eigen::MatrixXd& G = gram[slot(a.xpow + b.xpow, a.deriv, b.deriv)];
        H.block(block_of(a), block_of(b), n, n) += (w * a.scale * b.scale) * G;
      }
    }
  }

  pb.scale.resize(dim);
  for (int blk = 0; blk < blocks; ++blk) {
    const int order = blk % (P + 1);
    pb.scale.segment(blk * n, n).setConstant(std::pow(s, order));
  }
  pb.qp.H = pb.scale.asDiagonal() * H * pb.scale.asDiagonal();
  pb.qp.H = 0.5 * (pb.qp.H + pb.qp.H.transpose());
  pb.qp.f = Eigen::VectorXd::Zero(dim);
  pb.qp.E = Eigen::MatrixXd::Zero(1, dim);
  pb.qp.E(0, K) = 1.0;  // c_0^(0), order 0 so unscaled
  pb.qp.e = Eigen::VectorXd::Ones(1);

  const double edge = K + kernel.half_support();
  const int steps = static_cast<int>(std::floor(2.0 * edge / grid_step + 1e-9));
  std::vector<Eigen::VectorXd> rows;
  for (int s = 0; s <= steps; ++s) {
    const double t = -edge + s * grid_step;
    Eigen::VectorXd row = Eigen::VectorXd::Zero(dim);
    for (int k = -K; k <= K; ++k) row[k + K] = kernel(t - k);
    if (row.cwiseAbs().maxCoeff() == 0.0) continue;
    pb.grid.push_back(t);
    rows.push_back(row);
  }
  pb.qp.A.resize(static_cast<int>(rows.size()), dim);
  for (std::size_t r = 0; r < rows.size(); ++r) pb.qp.A.row(static_cast<int>(r)) = rows[r].transpose();
  pb.qp.b = Eigen::VectorXd::Zero(static_cast<int>(rows.size()));
  return pb;
}

GMCoefficients default_init(const BSplineKernel& kernel, int P, int K) {
  if (P < 0 || K < 0) throw InputError("P and K must be nonnegative");
  const int n = 2 * K + 1;
  GMCoefficients out;
  out.m = kernel.order();
  out.P = P;
  out.K = K;
  out.c.resize(P + 1, n);
  out.c_tilde.resize(P + 1, n);
  auto bump = [&](int k) {
    if (std::abs(k) > K) return 0.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * k / (K + 1.0)));
  };
  for (int k = -K; k <= K; ++k) {
    const double c0 = bump(k);
    const double d0 = 0.5 * (bump(k + 1) - bump(k - 1));
    double power = 1.0;
    for (int i = 0; i <= P; ++i) {
      out.c(i, k + K) = power * c0;
      out.c_tilde(i, k + K) = power * d0;
      power *= k;
    }
  }
  out.objective = gm_objective(out);
  out.status = "init";
  return out;
}

std::vector<double> gm_residual_norms(const GMCoefficients& coefs) {
  const BSplineKernel kernel(coefs.m);
  const double edge = coefs.support_half_width();
  const int nodes = coefs.m + 3;
  const double s = gm_coordinate_scale(coefs.K);
  std::vector<double> out;
  for (const auto& res : residual_terms(coefs.P)) {
    const double w = residual_weight(res, s);
    const double v = w * integrate_on_knots(kernel, -edge, edge, nodes, [&](double x) {
      double r = 0.0;
      for (const Term& t : res.terms) {
        const Eigen::MatrixXd& table = t.tilde ? coefs.c_tilde : coefs.c;
        r += t.scale * std::pow(x, t.xpow) * expand(table, t.row, coefs.K, coefs.m, x, t.deriv);
      }
      return r * r;
    });
    out.push_back(v);
  }
  return out;
}

double gm_objective(const GMCoefficients& coefs) {
  double total = 0.0;
  for (double v : gm_residual_norms(coefs)) total += v;
  return total;
}

GMCoefficients solve_gm(const GMProblem& problem, const std::optional<GMCoefficients>& init,
                        const GMSolveOptions& options) {
  const GMCoefficients start = init ? *init : default_init(BSplineKernel(problem.m), problem.P, problem.K);
  if (start.m != problem.m || start.P != problem.P || start.K != problem.K) {
    throw InputError("initial coefficients do not match the problem configuration");
  }
  QPOptions qo;
  qo.max_iter = options.max_iter;
  const QPResult res = solve_qp_primal(problem.qp, problem.pack(start), qo);
  if (res.status == QPStatus::Infeasible) throw NumericalError("generalized-moment program is infeasible");
  GMCoefficients out = problem.unpack(res.x);
  out.iterations = res.iterations;
  out.objective = gm_objective(out);
  out.status = res.status == QPStatus::Optimal && res.kkt_residual < options.tol ? "optimal"
               : res.status == QPStatus::Optimal                                 ? "optimal_loose_kkt"
                                                                                 : to_string(res.status);
  return out;
}

GMCoefficients fit_gm(const BSplineKernel& kernel, int P, int K, const GMSolveOptions& options) {
  return solve_gm(build_gm_objective(kernel, P, K), std::nullopt, options);
}

PositivityReport check_positivity(const GMCoefficients& coefs, double grid_step) {
  const double edge = coefs.support_half_width();
  const int steps = static_cast<int>(std::floor(2.0 * edge / grid_step + 1e-9));
  PositivityReport r;
  r.min_grid = r.min_interior = std::numeric_limits<double>::infinity();
  r.max_grid = -std::numeric_limits<double>::infinity();
  for (int s = 0; s <= steps; ++s) {
    const double t = -edge + s * grid_step;
    const double v = coefs.g(t);
    r.min_grid = std::min(r.min_grid, v);
    r.max_grid = std::max(r.max_grid, v);
    if (std::abs(t) <= coefs.K + 1e-12) r.min_interior = std::min(r.min_interior, v);
  }
  return r;
}

namespace {

nlohmann::json rows_json(const Eigen::MatrixXd& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < t.rows(); ++i) {
    std::vector<double> row(t.cols());
    for (int c = 0; c < t.cols(); ++c) row[c] = t(i, c);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd rows_from_json(const nlohmann::json& rows, int n_rows, int n_cols) {
  if (static_cast<int>(rows.size()) != n_rows) throw InputError("coefficient table needs P + 1 rows");
  Eigen::MatrixXd t(n_rows, n_cols);
  for (int i = 0; i < n_rows; ++i) {
    if (static_cast<int>(rows[i].size()) != n_cols) throw InputError("coefficient rows must have 2K + 1 entries");
    for (int c = 0; c < n_cols; ++c) t(i, c) = rows[i][c].get<double>();
  }
  return t;
}

}  // namespace

nlohmann::json to_json(const GMCoefficients& c) {
  return {{"m", c.m},
          {"N", c.P},
          {"k_min", -c.K},
          {"index_set", {-c.K, c.K}},
          {"window", c.window()},
          {"rows", rows_json(c.c)},
          {"rows_tilde", rows_json(c.c_tilde)},
          {"objective", c.objective},
          {"iterations", c.iterations},
          {"status", c.status}};
}

GMCoefficients gm_from_json(const nlohmann::json& j) {
  try {
    GMCoefficients c;
    c.m = j.at("m").get<int>();
    c.P = j.at("N").get<int>();
    c.K = -j.at("k_min").get<int>();
    if (c.K < 0 || c.P < 0 || c.m < 0) throw InputError("negative configuration value");
    c.c = rows_from_json(j.at("rows"), c.P + 1, c.window());
    c.c_tilde = rows_from_json(j.at("rows_tilde"), c.P + 1, c.window());
    c.objective = j.value("objective", 0.0);
    c.iterations = j.value("iterations", 0);
    c.status = j.value("status", std::string("loaded"));
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed generalized-moment JSON: ") + e.what());
  }
}

GMCoefficients load_gm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  return gm_from_json(j);
}

void save_gm(const GMCoefficients& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path + " for writing");
  out << to_json(c).dump(1) << '\n';
}

}  // namespace algshape
