#pragma once

#include "algshape/bspline.hpp"
#include "algshape/qp.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace algshape {

/// Coefficient sets with sum_k c_k^(i) beta(x - k) ~ x^i g(x) and
/// sum_k ct_k^(i) beta(x - k) ~ x^i g'(x), k in [-K, K].
struct GMCoefficients {
  int m = 0;
  int P = 0;
  int K = 0;
  Eigen::MatrixXd c;        // (P + 1) x (2K + 1), c(i, k + K)
  Eigen::MatrixXd c_tilde;  // same layout
  double objective = 0.0;   // G at these coefficients
  int iterations = 0;
  std::string status;

  int window() const { return 2 * K + 1; }
  double support_half_width() const { return K + 0.5 * (m + 1); }

  double coef(int i, int k) const { return c(i, k + K); }
  double coef_tilde(int i, int k) const { return c_tilde(i, k + K); }

  /// sum_k c_k^(i) beta(x - k); i = 0 is g itself.
  double reproduce(int i, double x) const;
  double reproduce_tilde(int i, double x) const;
  double g(double x) const { return reproduce(0, x); }
  /// Exact derivative of g.
  double g_derivative(double x) const;
};

/// G is measured in the coordinate x / s with s = max(K, 1), which puts every
/// order on the same footing: the c-chain residual of order i carries weight
/// s^(-2i), the ct-chain and derivative residuals s^(2 - 2i).
inline double gm_coordinate_scale(int K) { return K > 1 ? K : 1.0; }

/// Quadratic program over the stacked, order-prescaled unknowns.
/// u = D v with D = diag(K^i) per block; blocks are c^(0..P) then ct^(0..P).
struct GMProblem {
  int m = 0;
  int P = 0;
  int K = 0;
  QPProblem qp;                   // in the scaled variables v
  Eigen::VectorXd scale;          // diagonal of D
  std::vector<double> grid;       // positivity enforcement points t_j

  Eigen::VectorXd pack(const GMCoefficients& c) const;  // -> v
  GMCoefficients unpack(const Eigen::VectorXd& v) const;
};

/// Assembles G exactly from Gram integrals, the equality c_0^(0) = 1 and
/// g(t_j) >= 0 on a grid of spacing `grid_step` over the support of g.
GMProblem build_gm_objective(const BSplineKernel& kernel, int P, int K, double grid_step = 0.25);

/// Raised-cosine c^(0), c^(i)_k = k^i c^(0)_k, ct from central differences.
GMCoefficients default_init(const BSplineKernel& kernel, int P, int K);

/// Squared L2 norms of the individual residual functions of G, integrated
/// exactly on the knot lattice. Ordering: c-chain i = 1..P, ct-chain
/// i = 1..P, derivative terms i = 0..P.
std::vector<double> gm_residual_norms(const GMCoefficients& coefs);
double gm_objective(const GMCoefficients& coefs);

struct GMSolveOptions {
  int max_iter = 5000;
  double tol = 1e-9;
};

/// Primal active-set solve started from `init` (default_init when empty).
/// Throws NumericalError if the program is reported infeasible.
GMCoefficients solve_gm(const GMProblem& problem, const std::optional<GMCoefficients>& init = std::nullopt,
                        const GMSolveOptions& options = {});

/// build_gm_objective + solve_gm.
GMCoefficients fit_gm(const BSplineKernel& kernel, int P, int K, const GMSolveOptions& options = {});

struct PositivityReport {
  double min_grid = 0.0;      // min g over the whole enforcement grid
  double min_interior = 0.0;  // min g over grid points with |t| <= K
  double max_grid = 0.0;
};
PositivityReport check_positivity(const GMCoefficients& coefs, double grid_step = 0.25);

nlohmann::json to_json(const GMCoefficients& c);
GMCoefficients gm_from_json(const nlohmann::json& j);
GMCoefficients load_gm(const std::string& path);
void save_gm(const GMCoefficients& c, const std::string& path);

}  // namespace algshape
