#pragma once

#include "algshape/annihilate.hpp"
#include "algshape/bspline.hpp"
#include "algshape/gmfit.hpp"
#include "algshape/poly2d.hpp"
#include "algshape/qp.hpp"
#include "algshape/sampler.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace algshape {

struct SignConstraintSet {
  std::vector<std::pair<int, int>> inside;   // d >= 1 - epsilon
  std::vector<std::pair<int, int>> outside;  // d <= epsilon
  double epsilon = 0.2;
  double delta = 1e-3;
};

/// Classifies lattice points by their sample value. Only points whose kernel
/// support lies inside the image plane are used: near the border the samples
/// see the truncation of the plane, not the shape.
SignConstraintSet infer_signs(const SampleGrid& grid, double epsilon = 0.2, double delta = 1e-3);

struct LSSolution {
  Eigen::VectorXd a;      // system coordinates, a[0] = 1 unless fallback
  double residual = 0.0;  // |M a| / |a|
  bool fallback = false;  // smallest singular vector used
};

/// min |M a|^2 subject to a_00 = 1, minimum norm when the reduced problem is
/// rank deficient.
LSSolution solve_ls(const AnnihilationSystem& system);

struct SignQPSolution {
  Eigen::VectorXd a;  // system coordinates
  double objective = 0.0;
  bool feasible = false;
  int iterations = 0;
  double kkt_residual = 0.0;
  double a00 = 1.0;  // normalization used
};

/// min |M a|^2 subject to a_00 = +-1, p <= 0 at inside points and p >= delta
/// at outside points; both normalizations are tried and the feasible one with
/// the lower objective is kept. Returns feasible = false when neither is.
SignQPSolution solve_sign_qp(const AnnihilationSystem& system, const SignConstraintSet& signs,
                             const ImagePlane& plane);

struct RefineOptions {
  int max_iter = 10;
  double fd_step = 1e-2;
  int resolution = 64;           // forward model
  int jacobian_resolution = 32;  // finite-difference columns
  int max_halvings = 5;
};

struct RefineResult {
  Eigen::VectorXd a;  // system coordinates
  std::vector<double> residual_trace;  // |d - D(a)| per accepted iterate
  int iterations = 0;
};

/// Gauss-Newton style updates a += J^+ (d - D(a)) with a finite-difference
/// Jacobian; a_00 is held fixed and only decreasing steps are accepted.
RefineResult refine_consistency(const Eigen::VectorXd& a_cur, const SampleGrid& grid, const BSplineKernel& kernel,
                                const AnnihilationSystem& system, const RefineOptions& options = {});

enum class Cascade {
  Auto,    // sign QP and refinement only for noisy grids
  Always,
  LSOnly,
};

std::string to_string(Cascade c);
Cascade cascade_from_string(const std::string& s);

struct PipelineOptions {
  int degree = 4;
  AnnihilationMode mode = AnnihilationMode::Conventional;
  RsPolicy rs_policy = RsPolicy::Balanced;
  WindowPolicy window_policy = WindowPolicy::Grid;
  double sigma = 0.0;  // 0: half-width of the plane (conventional) or of the window (generalized)
  double epsilon = 0.2;
  double delta = 1e-3;
  Cascade cascade = Cascade::Auto;
  RefineOptions refine;
};

struct StageResult {
  BivariatePolynomial p;     // global coordinates
  double residual = 0.0;     // |M a| / |a| in system coordinates
  double sample_snr = 0.0;   // dB between input samples and samples of p
  bool ran = false;
};

struct RecoveryResult {
  StageResult ls;
  StageResult qp;
  StageResult final_stage;
  bool ls_fallback = false;
  bool qp_feasible = false;
  int qp_iterations = 0;
  int refine_iterations = 0;
  std::vector<double> refine_trace;
  double sigma = 1.0;
  int windows = 0;
  int rows = 0;
  double seconds_moments = 0.0;
  double seconds_ls = 0.0;
  double seconds_qp = 0.0;
  double seconds_refine = 0.0;

  const BivariatePolynomial& result() const { return final_stage.p; }
};

/// Samples -> moments -> annihilation -> LS -> (sign QP -> refinement).
/// coefs is required in generalized mode.
RecoveryResult run_pipeline(const SampleGrid& grid, const PipelineOptions& options,
                            const GMCoefficients* coefs = nullptr);

/// Builds the (normalized) annihilation system the pipeline would use.
AnnihilationSystem pipeline_system(const SampleGrid& grid, const PipelineOptions& options,
                                   const GMCoefficients* coefs = nullptr);

/// Timings are omitted when `timings` is false, which keeps the output
/// reproducible byte for byte.
nlohmann::json to_json(const RecoveryResult& r, bool timings = true);

}  // namespace algshape
