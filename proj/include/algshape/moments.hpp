#pragma once

#include "algshape/bspline.hpp"
#include "algshape/gmfit.hpp"
#include "algshape/poly2d.hpp"
#include "algshape/sampler.hpp"

#include <Eigen/Dense>

#include <string>

#include <json.hpp>

namespace algshape {

enum class MomentKind { Conventional, GG, GpG, GGp };

std::string to_string(MomentKind k);
MomentKind moment_kind_from_string(const std::string& s);

/// M(i, j) for 0 <= i <= max_i, 0 <= j <= max_j, in coordinates centered at
/// `center`.
struct MomentTable {
  MomentKind kind = MomentKind::Conventional;
  int max_i = 0;
  int max_j = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  Eigen::MatrixXd values;

  double at(int i, int j) const { return values(i, j); }
};

/// M_{i,j} = T^(i+j+2) sum_k sum_l c_k^(i) c_l^(j) d_{k,l}.
MomentTable moments_from_samples(const SampleGrid& grid, const ClassicalReproduction& repro, int max_i, int max_j);

struct GeneralizedMoments {
  MomentTable gg;   // x^i g(x) y^j g(y)
  MomentTable gpg;  // x^i g'(x) y^j g(y)
  MomentTable ggp;  // x^i g(x) y^j g'(y)
};

/// Contractions of the window of samples centered at lattice index
/// (kc, lc) with the generalized coefficient sets. The window spans
/// [kc - K, kc + K] x [lc - K, lc + K] and must lie within the grid.
GeneralizedMoments generalized_moments_from_samples(const SampleGrid& grid, const GMCoefficients& coefs, int max_i,
                                                    int max_j, int kc, int lc);

/// Weight for the brute-force oracle.
struct MomentWeight {
  MomentKind kind = MomentKind::Conventional;
  const GMCoefficients* coefs = nullptr;  // required unless kind is Conventional
  double x0 = 0.0;                        // window center, physical units
  double y0 = 0.0;
};

struct OracleOptions {
  int rows_per_unit = 1024;
  /// Integrate |x|^i |y|^j |w| instead, the normalization used for relative errors.
  bool absolute = false;
};

/// Direct quadrature of x^i y^j w(x, y) 1{p <= 0} over the plane. Each row
/// y is integrated exactly in x between the real roots of p(., y); rows
/// use the midpoint rule.
MomentTable oracle_moments(const BivariatePolynomial& p, const ImagePlane& plane, const MomentWeight& weight,
                           int max_i, int max_j, const OracleOptions& options = {});

/// Real roots of sum_i q[i] x^i inside (lo, hi), ascending.
std::vector<double> real_roots_in(const Eigen::VectorXd& q, double lo, double hi);

nlohmann::json to_json(const MomentTable& t);
MomentTable moment_table_from_json(const nlohmann::json& j);

}  // namespace algshape
