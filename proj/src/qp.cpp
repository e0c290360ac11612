#include "algshape/qp.hpp"

#include "algshape/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace algshape {

double QPProblem::objective(const Eigen::VectorXd& x) const { return x.dot(H * x) + f.dot(x); }

void QPProblem::validate() const {
  const auto n = H.rows();
  if (H.cols() != n || f.size() != n) throw InputError("QP: H must be square and match f");
  if ((E.rows() > 0 && E.cols() != n) || E.rows() != e.size()) throw InputError("QP: equality block mismatch");
  if ((A.rows() > 0 && A.cols() != n) || A.rows() != b.size()) throw InputError("QP: inequality block mismatch");
  const double scale = std::max(H.cwiseAbs().maxCoeff(), 1e-300);
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw InputError("QP: H is not symmetric");
}

std::string to_string(QPStatus s) {
  switch (s) {
    case QPStatus::Optimal:
      return "optimal";
    case QPStatus::IterationLimit:
      return "iteration_limit";
    case QPStatus::Infeasible:
      return "infeasible";
  }
  return "unknown";
}

namespace {

/// Cholesky factor of 2H + ridge, with the ridge grown until the
/// factorization succeeds.
struct Factor {
  Eigen::MatrixXd L;
  Eigen::MatrixXd Hq;  // 2H + ridge

  Eigen::MatrixXd solve_lower(const Eigen::MatrixXd& rhs) const {
    return L.triangularView<Eigen::Lower>().solve(rhs);
  }
  Eigen::VectorXd solve_upper(const Eigen::VectorXd& rhs) const {
    return L.transpose().triangularView<Eigen::Upper>().solve(rhs);
  }
};

Factor factorize(const QPProblem& pb, double ridge) {
  const int n = pb.dim();
  const double dmax = std::max(pb.H.diagonal().cwiseAbs().maxCoeff() * 2.0, 1e-300);
  double mu = ridge * dmax;
  for (int attempt = 0; attempt < 12; ++attempt) {
    Factor fac;
    fac.Hq = 2.0 * pb.H;
    fac.Hq.diagonal().array() += mu;
    Eigen::LLT<Eigen::MatrixXd> llt(fac.Hq);
    if (llt.info() == Eigen::Success) {
      fac.L = llt.matrixL();
      return fac;
    }
    mu = std::max(mu * 10.0, 1e-16 * dmax);
  }
  (void)n;
  throw NumericalError("QP: quadratic form is not positive semidefinite");
}

Eigen::MatrixXd active_normals(const QPProblem& pb, const std::vector<int>& active) {
  const int n = pb.dim();
  const int qe = static_cast<int>(pb.E.rows());
  Eigen::MatrixXd N(n, qe + static_cast<int>(active.size()));
  if (qe) N.leftCols(qe) = pb.E.transpose();
  for (std::size_t k = 0; k < active.size(); ++k) N.col(qe + static_cast<int>(k)) = pb.A.row(active[k]).transpose();
  return N;
}

/// Least-squares multipliers for grad = N lambda and the relative residual.
std::pair<Eigen::VectorXd, double> multipliers(const Eigen::MatrixXd& N, const Eigen::VectorXd& grad,
                                               double scale) {
  if (N.cols() == 0) return {Eigen::VectorXd(), grad.norm() / scale};
  Eigen::VectorXd lambda = N.colPivHouseholderQr().solve(grad);
  return {lambda, (grad - N * lambda).norm() / scale};
}

double max_violation(const QPProblem& pb, const Eigen::VectorXd& x) {
  double v = 0.0;
  if (pb.E.rows()) v = (pb.E * x - pb.e).cwiseAbs().maxCoeff();
  if (pb.A.rows()) v = std::max(v, (pb.b - pb.A * x).cwiseMax(0.0).maxCoeff());
  return v;
}

void finish(const QPProblem& pb, const Factor& fac, const std::vector<int>& active, QPResult& res) {
  res.objective = pb.objective(res.x);
  res.max_violation = max_violation(pb, res.x);
  const Eigen::VectorXd grad = fac.Hq * res.x + pb.f;
  const double scale = std::max({(fac.Hq * res.x).norm(), pb.f.norm(), 1e-300});
  res.kkt_residual = multipliers(active_normals(pb, active), grad, scale).second;
}

}  // namespace

QPResult solve_qp_primal(const QPProblem& pb, const Eigen::VectorXd& start, const QPOptions& opt) {
  pb.validate();
  const int n = pb.dim();
  const int qe = static_cast<int>(pb.E.rows());
  if (start.size() != n) throw InputError("QP: start vector has wrong size");
  const double viol = max_violation(pb, start);
  if (viol > 1e-8 * (1.0 + start.cwiseAbs().maxCoeff())) throw InputError("QP: primal start is infeasible");

  const Factor fac = factorize(pb, opt.ridge);
  QPResult res;
  res.x = start;
  res.objective_trace.push_back(pb.objective(res.x));
  std::vector<int> active;
  std::vector<char> in_active(pb.A.rows(), 0);
  bool stationary = false;  // set after a full (unblocked) step

  for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
    const Eigen::VectorXd grad = fac.Hq * res.x + pb.f;
    const Eigen::MatrixXd N = active_normals(pb, active);
    const Eigen::MatrixXd Y = fac.solve_lower(N);
    const Eigen::VectorXd z0 = fac.solve_lower(grad);
    Eigen::VectorXd lambda = N.cols() ? Eigen::VectorXd(Y.colPivHouseholderQr().solve(z0)) : Eigen::VectorXd();
    const Eigen::VectorXd r = N.cols() ? Eigen::VectorXd(z0 - Y * lambda) : z0;

    if (stationary || r.norm() <= 1e-13 * std::max(z0.norm(), 1e-300)) {
      stationary = false;
      int drop = -1;
      double most_negative = 0.0;
      const double lam_scale = lambda.size() ? std::max(1.0, lambda.cwiseAbs().maxCoeff()) : 1.0;
      for (std::size_t k = 0; k < active.size(); ++k) {
        const double lam = lambda[qe + static_cast<int>(k)];
        if (lam < -1e-10 * lam_scale && lam < most_negative) {
          most_negative = lam;
          drop = static_cast<int>(k);
        }
      }
      if (drop < 0) {
        res.status = QPStatus::Optimal;
        finish(pb, fac, active, res);
        return res;
      }
      in_active[active[drop]] = 0;
      active.erase(active.begin() + drop);
      continue;
    }

    const Eigen::VectorXd p = -fac.solve_upper(r);
    double alpha = 1.0;
    int blocking = -1;
    const Eigen::VectorXd Ap = pb.A * p;
    const Eigen::VectorXd slack = pb.A * res.x - pb.b;
    for (int i = 0; i < pb.A.rows(); ++i) {
      if (in_active[i] || Ap[i] >= 0.0) continue;
      const double step = std::max(0.0, slack[i]) / -Ap[i];
      if (step < alpha) {
        alpha = step;
        blocking = i;
      }
    }
    res.x += alpha * p;
    if (blocking >= 0) {
      active.push_back(blocking);
      in_active[blocking] = 1;
    } else {
      stationary = true;
    }
    res.objective_trace.push_back(pb.objective(res.x));
  }
  res.status = QPStatus::IterationLimit;
  finish(pb, fac, active, res);
  return res;
}

QPResult solve_qp_dual(const QPProblem& pb, const QPOptions& opt) {
  pb.validate();
  const int qe = static_cast<int>(pb.E.rows());
  const Factor fac = factorize(pb, opt.ridge);
  QPResult res;

  // Equality-constrained minimizer: x = Hq^-1 (E' mu - f).
  std::vector<int> active;
  {
    const Eigen::VectorXd zf = fac.solve_lower(pb.f);
    if (qe) {
      const Eigen::MatrixXd Y = fac.solve_lower(pb.E.transpose());
      // E Hq^-1 E' mu = e + E Hq^-1 f
      const Eigen::VectorXd rhs = pb.e + Y.transpose() * zf;
      const Eigen::VectorXd mu = (Y.transpose() * Y).ldlt().solve(rhs);
      res.x = fac.solve_upper(Y * mu - zf);
    } else {
      res.x = -fac.solve_upper(zf);
    }
  }
  std::vector<double> u;  // multipliers of active inequalities

  for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
    const Eigen::VectorXd s = pb.A * res.x - pb.b;
    int p = -1;
    double worst = 0.0;
    for (int i = 0; i < pb.A.rows(); ++i) {
      const double tol = opt.feasibility_tol * (1.0 + std::abs(pb.b[i]) + pb.A.row(i).cwiseAbs().maxCoeff());
      if (s[i] < -tol && s[i] < worst && std::find(active.begin(), active.end(), i) == active.end()) {
        worst = s[i];
        p = i;
      }
    }
    if (p < 0) {
      res.status = QPStatus::Optimal;
      finish(pb, fac, active, res);
      return res;
    }

    double up = 0.0;
    double sp = s[p];
    const Eigen::VectorXd np = pb.A.row(p).transpose();
    for (int inner = 0;; ++inner) {
      if (inner > opt.max_iter) {
        res.status = QPStatus::IterationLimit;
        finish(pb, fac, active, res);
        return res;
      }
      const Eigen::MatrixXd N = active_normals(pb, active);
      const Eigen::VectorXd w = fac.solve_lower(np);
      Eigen::VectorXd rdual;
      Eigen::VectorXd wres = w;
      if (N.cols()) {
        const Eigen::MatrixXd Y = fac.solve_lower(N);
        rdual = Y.colPivHouseholderQr().solve(w);
        wres = w - Y * rdual;
      }
      // Partial step bound from dual feasibility of active inequalities.
      double t1 = std::numeric_limits<double>::infinity();
      int drop = -1;
      for (std::size_t k = 0; k < active.size(); ++k) {
        const double rk = rdual[qe + static_cast<int>(k)];
        if (rk > 0.0 && u[k] / rk < t1) {
          t1 = u[k] / rk;
          drop = static_cast<int>(k);
        }
      }
      const bool dependent = wres.norm() <= 1e-12 * std::max(w.norm(), 1e-300);
      if (dependent) {
        if (drop < 0) {
          res.status = QPStatus::Infeasible;
          finish(pb, fac, active, res);
          return res;
        }
        for (std::size_t k = 0; k < active.size(); ++k) u[k] -= t1 * rdual[qe + static_cast<int>(k)];
        up += t1;
        active.erase(active.begin() + drop);
        u.erase(u.begin() + drop);
        continue;
      }
      const Eigen::VectorXd z = fac.solve_upper(wres);
      const double t2 = -sp / np.dot(z);
      const double t = std::min(t1, t2);
      res.x += t * z;
      for (std::size_t k = 0; k < active.size(); ++k) u[k] -= t * rdual[qe + static_cast<int>(k)];
      up += t;
      if (t2 <= t1) {
        active.push_back(p);
        u.push_back(up);
        break;
      }
      active.erase(active.begin() + drop);
      u.erase(u.begin() + drop);
      sp = np.dot(res.x) - pb.b[p];
    }
  }
  res.status = QPStatus::IterationLimit;
  finish(pb, fac, active, res);
  return res;
}

}  // namespace algshape
