#pragma once

#include "algshape/moments.hpp"
#include "algshape/poly2d.hpp"
#include "algshape/sampler.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace algshape {

enum class AnnihilationMode { Conventional, Generalized };
enum class RsPolicy { Balanced, Full };

std::string to_string(AnnihilationMode m);
std::string to_string(RsPolicy p);
AnnihilationMode annihilation_mode_from_string(const std::string& s);
RsPolicy rs_policy_from_string(const std::string& s);

/// Shift pairs (r, s): r, s <= n/2 (balanced) or r + s <= 2n - 1 (full).
std::vector<std::pair<int, int>> rs_pairs(int n, RsPolicy policy);

/// Largest per-axis moment order the row families touch.
int required_moment_order(int n, RsPolicy policy);

/// M a = 0 in global coordinates; when sigma != 1 the columns are expressed
/// in the normalized coordinates x / sigma (see normalize_coordinates).
struct AnnihilationSystem {
  Eigen::MatrixXd M;
  int degree = 0;
  AnnihilationMode mode = AnnihilationMode::Conventional;
  RsPolicy policy = RsPolicy::Balanced;
  std::vector<Eigen::Vector2d> windows;  // window centers, physical units
  double sigma = 1.0;

  int columns() const { return monomial_count(degree); }
  /// Normalized-coordinate coefficients -> global ones: a_ij = a'_ij sigma^-(i+j).
  Eigen::VectorXd to_global(const Eigen::VectorXd& normalized) const;
  Eigen::VectorXd to_normalized(const Eigen::VectorXd& global) const;
};

/// Rows (i+r) M_{i+r-1,j+s} and (j+s) M_{i+r,j+s-1}; a table centered
/// away from the origin is shift-compensated into global coordinates.
AnnihilationSystem build_conventional(const MomentTable& table, int n, RsPolicy policy = RsPolicy::Balanced);

/// One block per window: the two generalized row families in window-local
/// coordinates, times the shift matrix of the window center. Rows have unit
/// norm.
AnnihilationSystem build_generalized(const std::vector<GeneralizedMoments>& tables, int n,
                                     RsPolicy policy = RsPolicy::Balanced);

/// Column (i, j) scaled by sigma^-(i+j), then rows renormalized. Composes with
/// an earlier normalization.
AnnihilationSystem normalize_coordinates(const AnnihilationSystem& system, double sigma);

enum class WindowPolicy {
  Grid,   // every window fully inside the sample grid
  Plane,  // additionally the weight support stays inside the image plane
};

std::string to_string(WindowPolicy p);
WindowPolicy window_policy_from_string(const std::string& s);

/// Lattice centers (kc, lc) of admissible windows, stride 1.
std::vector<std::pair<int, int>> enumerate_windows(const SampleGrid& grid, const GMCoefficients& coefs,
                                                   WindowPolicy policy = WindowPolicy::Grid);

void export_system(const AnnihilationSystem& system, const std::string& csv_path, const std::string& json_path);
nlohmann::json system_metadata(const AnnihilationSystem& system);

}  // namespace algshape
