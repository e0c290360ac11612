#include "algshape/recover.hpp"

#include "algshape/errors.hpp"
#include "algshape/moments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

namespace algshape {

SignConstraintSet infer_signs(const SampleGrid& grid, double epsilon, double delta) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw InputError("epsilon must lie in (0, 0.5)");
  if (!(delta > 0.0)) throw InputError("delta must be positive");
  SignConstraintSet set;
  set.epsilon = epsilon;
  set.delta = delta;
  const double T = grid.plane.period;
  const double reach = T * 0.5 * (grid.m + 1);
  const double L = grid.plane.half_width;
  for (int k = grid.k_range.lo; k <= grid.k_range.hi; ++k) {
    if (std::abs(k * T) + reach > L + 1e-12) continue;
    for (int l = grid.l_range.lo; l <= grid.l_range.hi; ++l) {
      if (std::abs(l * T) + reach > L + 1e-12) continue;
      const double d = grid.at(k, l);
      if (d >= 1.0 - epsilon) {
        set.inside.emplace_back(k, l);
      } else if (d <= epsilon) {
        set.outside.emplace_back(k, l);
      }
    }
  }
  return set;
}

LSSolution solve_ls(const AnnihilationSystem& system) {
  const Eigen::MatrixXd& M = system.M;
  if (M.rows() == 0) throw InputError("annihilation system is empty");
  if (!M.allFinite()) throw NumericalError("annihilation system has non-finite entries");
  if (M.norm() == 0.0) throw NumericalError("annihilation system is zero: the samples carry no shape");
  const int n = static_cast<int>(M.cols());
  LSSolution out;
  const double scale = std::max(M.norm(), 1e-300);
  const Eigen::VectorXd m0 = M.col(0);
  if (m0.norm() > 1e-14 * scale) {
    const Eigen::MatrixXd M1 = M.rightCols(n - 1);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M1);
    cod.setThreshold(1e-13);
    out.a.resize(n);
    out.a[0] = 1.0;
    out.a.tail(n - 1) = -cod.solve(m0);
    if (out.a.allFinite()) {
      out.residual = (M * out.a).norm() / out.a.norm();
      return out;
    }
  }
  // a_00 cannot be normalized: unit-norm smallest singular vector.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  out.a = svd.matrixV().col(n - 1);
  out.fallback = true;
  out.residual = (M * out.a).norm();
  return out;
}

namespace {

Eigen::RowVectorXd monomial_row(int degree, double x, double y) {
  Eigen::RowVectorXd row(monomial_count(degree));
  for (int c = 0; c < row.size(); ++c) {
    const auto [i, j] = monomial_exponents(c);
    row[c] = std::pow(x, i) * std::pow(y, j);
  }
  return row;
}

BivariatePolynomial global_polynomial(const AnnihilationSystem& system, const Eigen::VectorXd& a) {
  return BivariatePolynomial(system.degree, system.to_global(a));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

SignQPSolution solve_sign_qp(const AnnihilationSystem& system, const SignConstraintSet& signs,
                             const ImagePlane& plane) {
  const int n = static_cast<int>(system.M.cols());
  const double T = plane.period;
  const int rows = static_cast<int>(signs.inside.size() + signs.outside.size());
  QPProblem base;
  base.H = system.M.transpose() * system.M;
  base.H = 0.5 * (base.H + base.H.transpose());
  base.f = Eigen::VectorXd::Zero(n);
  base.E = Eigen::MatrixXd::Zero(1, n);
  base.E(0, 0) = 1.0;
  base.A.resize(rows, n);
  base.b.resize(rows);
  int r = 0;
  for (const auto& [k, l] : signs.inside) {
    base.A.row(r) = -monomial_row(system.degree, k * T / system.sigma, l * T / system.sigma);
    base.b[r++] = 0.0;
  }
  for (const auto& [k, l] : signs.outside) {
    base.A.row(r) = monomial_row(system.degree, k * T / system.sigma, l * T / system.sigma);
    base.b[r++] = signs.delta;
  }

  SignQPSolution best;
  best.objective = std::numeric_limits<double>::infinity();
  for (double a00 : {1.0, -1.0}) {
    QPProblem pb = base;
    pb.e = Eigen::VectorXd::Constant(1, a00);
    const QPResult res = solve_qp_dual(pb);
    best.iterations += res.iterations;
    if (res.status != QPStatus::Optimal) continue;
    if (res.max_violation > 1e-7 * (1.0 + res.x.cwiseAbs().maxCoeff())) continue;
    if (res.objective < best.objective) {
      best.a = res.x;
      best.objective = res.objective;
      best.feasible = true;
      best.kkt_residual = res.kkt_residual;
      best.a00 = a00;
    }
  }
  if (!best.feasible) best.objective = 0.0;
  return best;
}

RefineResult refine_consistency(const Eigen::VectorXd& a_cur, const SampleGrid& grid, const BSplineKernel& kernel,
                                const AnnihilationSystem& system, const RefineOptions& options) {
  if (a_cur.size() != system.columns()) throw InputError("coefficient vector does not match the system degree");
  if (kernel.order() != grid.m) throw InputError("kernel order differs from the sample grid's");
  const ShapeSampler forward(grid.plane, kernel, grid.k_range, grid.l_range, options.resolution);
  const ShapeSampler coarse(grid.plane, kernel, grid.k_range, grid.l_range, options.jacobian_resolution);
  const int n = static_cast<int>(a_cur.size());
  const int free = n - 1;  // a_00 fixed

  auto residual_of = [&](const Eigen::VectorXd& a) -> Eigen::MatrixXd {
    return grid.values - forward(global_polynomial(system, a));
  };

  RefineResult out;
  out.a = a_cur;
  Eigen::MatrixXd res = residual_of(out.a);
  double rnorm = res.norm();
  out.residual_trace.push_back(rnorm);
  if (rnorm == 0.0 || free == 0) return out;

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(free)));
  const Eigen::Index m = grid.values.size();

  for (out.iterations = 0; out.iterations < options.max_iter; ++out.iterations) {
    Eigen::MatrixXd J(m, free);
    auto column = [&](int j) {
      const int c = j + 1;
      const double h = options.fd_step * std::max(1.0, std::abs(out.a[c]));
      Eigen::VectorXd ap = out.a;
      Eigen::VectorXd am = out.a;
      ap[c] += h;
      am[c] -= h;
      const Eigen::MatrixXd diff =
          (coarse(global_polynomial(system, ap)) - coarse(global_polynomial(system, am))) / (2.0 * h);
      J.col(j) = Eigen::Map<const Eigen::VectorXd>(diff.data(), m);
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int j = w; j < free; j += workers) column(j);
      });
    }
    for (auto& t : pool) t.join();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] == 0.0) break;
    const double cut = 1e-8 * sv[0];
    Eigen::VectorXd rhs = svd.matrixU().transpose() * Eigen::Map<const Eigen::VectorXd>(res.data(), m);
    for (int i = 0; i < sv.size(); ++i) rhs[i] = sv[i] > cut ? rhs[i] / sv[i] : 0.0;
    const Eigen::VectorXd step = svd.matrixV() * rhs;

    bool accepted = false;
    double t = 1.0;
    for (int h = 0; h <= options.max_halvings; ++h, t *= 0.5) {
      Eigen::VectorXd trial = out.a;
      trial.tail(free) += t * step;
      const Eigen::MatrixXd trial_res = residual_of(trial);
      const double tn = trial_res.norm();
      if (tn < rnorm) {
        out.a = trial;
        res = trial_res;
        rnorm = tn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    out.residual_trace.push_back(rnorm);
  }
  return out;
}

std::string to_string(Cascade c) {
  switch (c) {
    case Cascade::Auto:
      return "auto";
    case Cascade::Always:
      return "always";
    case Cascade::LSOnly:
      return "ls-only";
  }
  return "unknown";
}

Cascade cascade_from_string(const std::string& s) {
  if (s == "auto") return Cascade::Auto;
  if (s == "always") return Cascade::Always;
  if (s == "ls-only") return Cascade::LSOnly;
  throw InputError("unknown cascade '" + s + "'");
}

AnnihilationSystem pipeline_system(const SampleGrid& grid, const PipelineOptions& options,
                                   const GMCoefficients* coefs) {
  const int n = options.degree;
  if (n < 1) throw InputError("polynomial degree must be at least 1");
  const int need = required_moment_order(n, options.rs_policy);
  const BSplineKernel kernel(grid.m);
  AnnihilationSystem sys;
  double sigma = options.sigma;
  if (options.mode == AnnihilationMode::Conventional) {
    if (need > grid.m) {
      throw InputError("conventional moments of order " + std::to_string(need) + " need a kernel of order >= " +
                       std::to_string(need) + ", got " + std::to_string(grid.m));
    }
    const int lo = std::min(grid.k_range.lo, grid.l_range.lo);
    const int hi = std::max(grid.k_range.hi, grid.l_range.hi);
    const ClassicalReproduction repro = classical_coefficients(kernel, need, lo, hi);
    sys = build_conventional(moments_from_samples(grid, repro, need, need), n, options.rs_policy);
    if (sigma == 0.0) sigma = grid.plane.half_width;
  } else {
    if (!coefs) throw InputError("generalized mode needs generalized moment coefficients");
    if (coefs->P < need) {
      throw InputError("generalized coefficients of order " + std::to_string(coefs->P) + " are too low, need " +
                       std::to_string(need));
    }
    const auto centers = enumerate_windows(grid, *coefs, options.window_policy);
    if (centers.empty()) throw InputError("no admissible window for this grid and index set");
    std::vector<GeneralizedMoments> tables;
    tables.reserve(centers.size());
    for (const auto& [kc, lc] : centers) {
      tables.push_back(generalized_moments_from_samples(grid, *coefs, need, need, kc, lc));
    }
    sys = build_generalized(tables, n, options.rs_policy);
    if (sigma == 0.0) sigma = coefs->K * grid.plane.period;
  }
  return normalize_coordinates(sys, sigma);
}

RecoveryResult run_pipeline(const SampleGrid& grid, const PipelineOptions& options, const GMCoefficients* coefs) {
  const BSplineKernel kernel(grid.m);
  RecoveryResult out;
  auto t0 = std::chrono::steady_clock::now();
  const AnnihilationSystem sys = pipeline_system(grid, options, coefs);
  out.seconds_moments = seconds_since(t0);
  out.sigma = sys.sigma;
  out.windows = static_cast<int>(sys.windows.size());
  out.rows = static_cast<int>(sys.M.rows());

  const ShapeSampler forward(grid.plane, kernel, grid.k_range, grid.l_range, options.refine.resolution);
  auto stage = [&](const Eigen::VectorXd& a) {
    StageResult s;
    s.p = global_polynomial(sys, a);
    s.residual = (sys.M * a).norm() / a.norm();
    s.sample_snr = sample_snr(grid.values, forward(s.p));
    s.ran = true;
    return s;
  };

  // Least squares; a and -a annihilate equally, keep the orientation that
  // agrees with the samples.
  t0 = std::chrono::steady_clock::now();
  const LSSolution ls = solve_ls(sys);
  out.ls_fallback = ls.fallback;
  StageResult plus = stage(ls.a);
  StageResult minus = stage(-ls.a);
  Eigen::VectorXd a_ls = ls.a;
  if (minus.sample_snr > plus.sample_snr) {
    a_ls = -ls.a;
    out.ls = minus;
  } else {
    out.ls = plus;
  }
  out.seconds_ls = seconds_since(t0);

  const bool cascade =
      options.cascade == Cascade::Always || (options.cascade == Cascade::Auto && grid.noisy());
  Eigen::VectorXd a_cur = a_ls;
  if (cascade) {
    t0 = std::chrono::steady_clock::now();
    const SignConstraintSet signs = infer_signs(grid, options.epsilon, options.delta);
    const SignQPSolution qp = solve_sign_qp(sys, signs, grid.plane);
    out.qp_feasible = qp.feasible;
    out.qp_iterations = qp.iterations;
    if (qp.feasible) a_cur = qp.a;
    out.qp = stage(a_cur);
    out.seconds_qp = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    // Refinement holds a_00 fixed, so it needs a nonzero a_00.
    if (std::abs(a_cur[0]) > 0.0) {
      const RefineResult ref = refine_consistency(a_cur, grid, kernel, sys, options.refine);
      a_cur = ref.a;
      out.refine_iterations = ref.iterations;
      out.refine_trace = ref.residual_trace;
    }
    out.final_stage = stage(a_cur);
    out.seconds_refine = seconds_since(t0);
  } else {
    out.final_stage = out.ls;
  }
  return out;
}

namespace {

nlohmann::json stage_json(const StageResult& s) {
  if (!s.ran) return nullptr;
  const double snr = s.sample_snr;
  return {{"polynomial", to_json(s.p)},
          {"residual", s.residual},
          {"sample_snr_db", std::isfinite(snr) ? nlohmann::json(snr) : nlohmann::json("inf")}};
}

}  // namespace

nlohmann::json to_json(const RecoveryResult& r, bool timings) {
  nlohmann::json j = {{"ls", stage_json(r.ls)},
          {"qp", stage_json(r.qp)},
          {"final", stage_json(r.final_stage)},
          {"ls_fallback", r.ls_fallback},
          {"qp_feasible", r.qp_feasible},
          {"qp_iterations", r.qp_iterations},
          {"refine_iterations", r.refine_iterations},
          {"refine_trace", r.refine_trace},
          {"sigma", r.sigma},
          {"windows", r.windows},
          {"rows", r.rows}};
  if (timings) {
    j["timings_s"] = {
        {"moments", r.seconds_moments}, {"ls", r.seconds_ls}, {"qp", r.seconds_qp}, {"refine", r.seconds_refine}};
  }
  return j;
}

}  // namespace algshape
