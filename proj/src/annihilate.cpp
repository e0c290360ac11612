#include "algshape/annihilate.hpp"

#include "algshape/errors.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace algshape {

std::string to_string(AnnihilationMode m) {
  return m == AnnihilationMode::Conventional ? "conventional" : "generalized";
}

std::string to_string(RsPolicy p) { return p == RsPolicy::Balanced ? "balanced" : "full"; }

AnnihilationMode annihilation_mode_from_string(const std::string& s) {
  if (s == "conventional") return AnnihilationMode::Conventional;
  if (s == "generalized") return AnnihilationMode::Generalized;
  throw InputError("unknown annihilation mode '" + s + "'");
}

RsPolicy rs_policy_from_string(const std::string& s) {
  if (s == "balanced") return RsPolicy::Balanced;
  if (s == "full") return RsPolicy::Full;
  throw InputError("unknown rs policy '" + s + "'");
}

std::string to_string(WindowPolicy p) { return p == WindowPolicy::Grid ? "grid" : "plane"; }

WindowPolicy window_policy_from_string(const std::string& s) {
  if (s == "grid") return WindowPolicy::Grid;
  if (s == "plane") return WindowPolicy::Plane;
  throw InputError("unknown window policy '" + s + "'");
}

std::vector<std::pair<int, int>> rs_pairs(int n, RsPolicy policy) {
  std::vector<std::pair<int, int>> out;
  if (policy == RsPolicy::Balanced) {
    for (int r = 0; r <= n / 2; ++r) {
      for (int s = 0; s <= n / 2; ++s) out.emplace_back(r, s);
    }
  } else {
    for (int d = 0; d <= 2 * n - 1; ++d) {
      for (int r = 0; r <= d; ++r) out.emplace_back(r, d - r);
    }
  }
  return out;
}

int required_moment_order(int n, RsPolicy policy) { return policy == RsPolicy::Balanced ? n + n / 2 : 3 * n - 1; }

namespace {

Eigen::VectorXd power_diagonal(int degree, double sigma, double sign) {
  Eigen::VectorXd d(monomial_count(degree));
  for (int c = 0; c < d.size(); ++c) {
    const auto [i, j] = monomial_exponents(c);
    d[c] = std::pow(sigma, sign * (i + j));
  }
  return d;
}

void normalize_rows(Eigen::MatrixXd& M) {
  for (int r = 0; r < M.rows(); ++r) {
    const double nrm = M.row(r).norm();
    if (nrm > 0.0) M.row(r) /= nrm;
  }
}

void check_orders(const MomentTable& t, int need, const char* what) {
  if (t.max_i < need || t.max_j < need) {
    throw InputError(std::string(what) + " moments of order " + std::to_string(need) + " are required, table has " +
                     std::to_string(std::min(t.max_i, t.max_j)));
  }
}

/// Rows for one window in local coordinates. gpg/ggp are null in
/// conventional mode.
Eigen::MatrixXd local_block(const MomentTable& gg, const MomentTable* gpg, const MomentTable* ggp, int n,
                            RsPolicy policy) {
  const auto pairs = rs_pairs(n, policy);
  const int cols = monomial_count(n);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2 * static_cast<int>(pairs.size()), cols);
  int row = 0;
  for (const auto& [r, s] : pairs) {
    for (int c = 0; c < cols; ++c) {
      const auto [i, j] = monomial_exponents(c);
      double ex = i + r > 0 ? (i + r) * gg.at(i + r - 1, j + s) : 0.0;
      double ey = j + s > 0 ? (j + s) * gg.at(i + r, j + s - 1) : 0.0;
      if (gpg) ex += gpg->at(i + r, j + s);
      if (ggp) ey += ggp->at(i + r, j + s);
      B(row, c) = ex;
      B(row + 1, c) = ey;
    }
    row += 2;
  }
  return B;
}

}  // namespace

Eigen::VectorXd AnnihilationSystem::to_global(const Eigen::VectorXd& normalized) const {
  return normalized.cwiseProduct(power_diagonal(degree, sigma, -1.0));
}

Eigen::VectorXd AnnihilationSystem::to_normalized(const Eigen::VectorXd& global) const {
  return global.cwiseProduct(power_diagonal(degree, sigma, 1.0));
}

AnnihilationSystem build_conventional(const MomentTable& table, int n, RsPolicy policy) {
  if (n < 1) throw InputError("polynomial degree must be at least 1");
  if (table.kind != MomentKind::Conventional) throw InputError("conventional build needs a conventional table");
  check_orders(table, required_moment_order(n, policy), "conventional");
  AnnihilationSystem sys;
  sys.degree = n;
  sys.mode = AnnihilationMode::Conventional;
  sys.policy = policy;
  sys.windows.emplace_back(table.x0, table.y0);
  sys.M = local_block(table, nullptr, nullptr, n, policy);
  if (table.x0 != 0.0 || table.y0 != 0.0) sys.M = sys.M * shift_matrix(n, table.x0, table.y0).entries;
  normalize_rows(sys.M);
  return sys;
}

AnnihilationSystem build_generalized(const std::vector<GeneralizedMoments>& tables, int n, RsPolicy policy) {
  if (n < 1) throw InputError("polynomial degree must be at least 1");
  if (tables.empty()) throw InputError("generalized build needs at least one window");
  const int need = required_moment_order(n, policy);
  const int per = 2 * static_cast<int>(rs_pairs(n, policy).size());
  AnnihilationSystem sys;
  sys.degree = n;
  sys.mode = AnnihilationMode::Generalized;
  sys.policy = policy;
  sys.M.resize(per * static_cast<int>(tables.size()), monomial_count(n));
  for (std::size_t w = 0; w < tables.size(); ++w) {
    const auto& t = tables[w];
    if (t.gg.kind != MomentKind::GG || t.gpg.kind != MomentKind::GpG || t.ggp.kind != MomentKind::GGp) {
      throw InputError("window " + std::to_string(w) + " has mislabelled moment tables");
    }
    if (t.gpg.x0 != t.gg.x0 || t.ggp.x0 != t.gg.x0 || t.gpg.y0 != t.gg.y0 || t.ggp.y0 != t.gg.y0) {
      throw InputError("window " + std::to_string(w) + " mixes tables with different centers");
    }
    // The g'.g and g.g' terms reach one order higher than the g.g ones.
    check_orders(t.gg, need, "g.g");
    check_orders(t.gpg, need, "g'.g");
    check_orders(t.ggp, need, "g.g'");
    Eigen::MatrixXd block = local_block(t.gg, &t.gpg, &t.ggp, n, policy);
    block = block * shift_matrix(n, t.gg.x0, t.gg.y0).entries;
    sys.M.middleRows(per * static_cast<int>(w), per) = block;
    sys.windows.emplace_back(t.gg.x0, t.gg.y0);
  }
  normalize_rows(sys.M);
  return sys;
}

AnnihilationSystem normalize_coordinates(const AnnihilationSystem& system, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("normalization scale must be positive");
  AnnihilationSystem out = system;
  if (sigma == 1.0) return out;
  out.M = system.M * power_diagonal(system.degree, sigma, -1.0).asDiagonal();
  out.sigma = system.sigma * sigma;
  normalize_rows(out.M);
  return out;
}

std::vector<std::pair<int, int>> enumerate_windows(const SampleGrid& grid, const GMCoefficients& coefs,
                                                   WindowPolicy policy) {
  const int K = coefs.K;
  const double T = grid.plane.period;
  const double L = grid.plane.half_width;
  const double reach = T * coefs.support_half_width();
  std::vector<std::pair<int, int>> out;
  for (int kc = grid.k_range.lo + K; kc <= grid.k_range.hi - K; ++kc) {
    if (policy == WindowPolicy::Plane && std::abs(kc * T) + reach > L + 1e-12) continue;
    for (int lc = grid.l_range.lo + K; lc <= grid.l_range.hi - K; ++lc) {
      if (policy == WindowPolicy::Plane && std::abs(lc * T) + reach > L + 1e-12) continue;
      out.emplace_back(kc, lc);
    }
  }
  return out;
}

nlohmann::json system_metadata(const AnnihilationSystem& system) {
  nlohmann::json windows = nlohmann::json::array();
  for (const auto& w : system.windows) windows.push_back({w.x(), w.y()});
  return {{"degree", system.degree},
          {"mode", to_string(system.mode)},
          {"policy", to_string(system.policy)},
          {"rows", system.M.rows()},
          {"columns", system.M.cols()},
          {"windows", windows},
          {"sigma", system.sigma}};
}

void export_system(const AnnihilationSystem& system, const std::string& csv_path, const std::string& json_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw InputError("cannot write " + csv_path);
  csv << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int r = 0; r < system.M.rows(); ++r) {
    for (int c = 0; c < system.M.cols(); ++c) csv << (c ? "," : "") << system.M(r, c);
    csv << '\n';
  }
  std::ofstream js(json_path);
  if (!js) throw InputError("cannot write " + json_path);
  js << system_metadata(system).dump(2) << '\n';
}

}  // namespace algshape
