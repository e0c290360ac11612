#pragma once

#include <Eigen/Dense>

#include <string>

namespace algshape {

/// minimize  x'Hx + f'x   subject to  E x = e,  A x >= b.
/// H is symmetric positive semidefinite.
struct QPProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd E;
  Eigen::VectorXd e;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;

  int dim() const { return static_cast<int>(H.rows()); }
  double objective(const Eigen::VectorXd& x) const;
  /// Throws InputError on inconsistent dimensions or asymmetric H.
  void validate() const;
};

enum class QPStatus { Optimal, IterationLimit, Infeasible };

std::string to_string(QPStatus s);

struct QPResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  QPStatus status = QPStatus::Optimal;
  int iterations = 0;
  /// Relative first-order residual |2Hx + f - E'mu - A'lambda| / scale.
  double kkt_residual = 0.0;
  /// Largest constraint violation at x.
  double max_violation = 0.0;
  /// Objective after each accepted primal step (primal solver only).
  std::vector<double> objective_trace;
};

struct QPOptions {
  int max_iter = 2000;
  /// Ridge added to H relative to its largest diagonal entry, making the
  /// Cholesky factor well defined for semidefinite problems.
  double ridge = 1e-13;
  double feasibility_tol = 1e-10;
};

/// Primal active-set method started from a feasible point. The objective is
/// non-increasing across iterations.
QPResult solve_qp_primal(const QPProblem& problem, const Eigen::VectorXd& feasible_start,
                         const QPOptions& options = {});

/// Dual active-set method in the style of Goldfarb and Idnani. Needs no
/// feasible start and reports Infeasible when the constraints are
/// inconsistent.
QPResult solve_qp_dual(const QPProblem& problem, const QPOptions& options = {});

}  // namespace algshape
