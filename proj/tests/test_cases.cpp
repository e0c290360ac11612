// Worked cases with hand-checkable answers, one suite per module.

#include "algshape/annihilate.hpp"
#include "algshape/errors.hpp"
#include "algshape/metrics.hpp"
#include "algshape/recover.hpp"
#include "algshape/shapegen.hpp"

#include "gm_oracle.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace algshape;

namespace {

const BivariatePolynomial kUnitCircle = gen_conic({0.0, 0.0}, {1.0, 1.0}, 0.0);

BivariatePolynomial constant(double c) { return BivariatePolynomial(0, Eigen::VectorXd::Constant(1, c)); }

MomentTable unit_disk_table(int order) {
  MomentTable t;
  t.max_i = t.max_j = order;
  t.values.resize(order + 1, order + 1);
  for (int i = 0; i <= order; ++i) {
    for (int j = 0; j <= order; ++j) t.values(i, j) = oracle::disk_moment(1.0, i, j);
  }
  return t;
}

double condition(const Eigen::MatrixXd& M) {
  const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues();
  return s[0] / s[s.size() - 1];
}

}  // namespace

TEST(Poly2dCases, Evaluation) {
  EXPECT_EQ(kUnitCircle(1.0, 0.0), 0.0);
  EXPECT_EQ(constant(1.0)(7.3, -2.0), 1.0);
  EXPECT_DOUBLE_EQ(kUnitCircle(0.5, 0.5), -0.5);
}

TEST(Poly2dCases, Rendering) {
  const Raster all = render_shape(constant(-1.0), ImagePlane{1.0, 1.0}, 16);
  EXPECT_EQ(all.count(), all.data.size());
  const Raster disk = render_shape(kUnitCircle, ImagePlane{2.0, 1.0}, 256);
  EXPECT_NEAR(disk.count() / (256.0 * 256.0), std::numbers::pi, 0.005 * std::numbers::pi);
  const Raster half = render_shape(gen_half_space({1.0, 0.0}, 0.0), ImagePlane{1.0, 1.0}, 16);
  EXPECT_EQ(half.count(), half.data.size() / 2);
  EXPECT_EQ(half.at(0, 0), 1);
  EXPECT_EQ(half.at(0, half.width - 1), 0);
}

TEST(Poly2dCases, Shifts) {
  EXPECT_TRUE(shift_matrix(4, 0.0, 0.0).entries.isIdentity());
  BivariatePolynomial x(1);
  x.set_coeff(1, 0, 1.0);
  const BivariatePolynomial s = shift_matrix(1, 2.0, 0.0).apply(x);
  EXPECT_DOUBLE_EQ(s.coeff(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(s.coeff(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(shift_matrix(2, 1.0, 1.0).apply(kUnitCircle)(0.0, 0.0), 1.0);
}

TEST(Poly2dCases, ZeroSetDistance) {
  const ImagePlane plane{2.0, 1.0};
  EXPECT_NEAR(*zero_set_distance(kUnitCircle, kUnitCircle, plane), 0.0, 1e-9);
  EXPECT_NEAR(*zero_set_distance(kUnitCircle, 2.0 * kUnitCircle, plane), 0.0, 1e-9);
  EXPECT_NEAR(*zero_set_distance(kUnitCircle, gen_conic({0.0, 0.0}, {1.1, 1.1}, 0.0), plane), 0.1, 1e-6);
}

TEST(BSplineCases, Values) {
  const BSplineKernel b0(0), b1(1), b2(2);
  EXPECT_EQ(b0(0.0), 1.0);
  EXPECT_EQ(b0(0.5), 0.5);
  EXPECT_EQ(b1(0.0), 1.0);
  EXPECT_EQ(b1(1.0), 0.0);
  EXPECT_EQ(b1(-1.0), 0.0);
  EXPECT_EQ(b2.derivative(0.0), 0.0);
  EXPECT_DOUBLE_EQ(b1.derivative(-0.5), 1.0);
  for (int m = 1; m <= 6; ++m) {
    const BSplineKernel k(m);
    EXPECT_NEAR(integrate_on_knots(k, -k.half_support(), k.half_support(), m + 1,
                                   [&](double x) { return k.derivative(x); }),
                0.0, 1e-14);
  }
}

TEST(BSplineCases, Gram) {
  EXPECT_NEAR(gram_integrals(BSplineKernel(0), 0, {false, false}, 0, 0), 1.0, 1e-15);
  EXPECT_NEAR(gram_integrals(BSplineKernel(1), 0, {false, false}, 0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(gram_integrals(BSplineKernel(3), 2, {true, false}, -3, 2), 0.0);
}

TEST(BSplineCases, ReproductionCoefficients) {
  const ClassicalReproduction r1 = classical_coefficients(BSplineKernel(1), 1, -5, 5);
  for (int k = -5; k <= 5; ++k) {
    EXPECT_NEAR(r1.c(0, k), 1.0, 1e-12);
    EXPECT_NEAR(r1.c(1, k), k, 1e-12);
  }
  const ClassicalReproduction r6 = classical_coefficients(BSplineKernel(6), 6, -45, 45);
  const double slope = std::log(std::abs(r6.c(6, 40) / r6.c(6, 20))) / std::log(2.0);
  EXPECT_NEAR(slope, 6.0, 0.2);
}

TEST(SamplerCases, Values) {
  const ImagePlane plane{2.0, 1.0};
  const SampleGrid inside = sample_shape(constant(-1.0), plane, BSplineKernel(0), 64);
  EXPECT_NEAR(inside.at(0, 0), 1.0, 1e-12);
  const SampleGrid outside = sample_shape(constant(1.0), plane, BSplineKernel(0), 64);
  EXPECT_EQ(outside.values.cwiseAbs().maxCoeff(), 0.0);
  const SampleGrid half = sample_shape(gen_half_space({1.0, 0.0}, 0.0), plane, BSplineKernel(0), 1024);
  EXPECT_NEAR(half.at(0, 0), 0.5, 2e-3);
}

TEST(SamplerCases, DiskSamples) {
  const ImagePlane plane{5.0, 1.0};
  const SampleGrid d = sample_shape(kUnitCircle, plane, BSplineKernel(6), 64);
  EXPECT_GE(d.values.minCoeff(), 0.0);
  EXPECT_LE(d.values.maxCoeff(), 1.0);
  EXPECT_NEAR(d.values.sum(), std::numbers::pi, 0.02 * std::numbers::pi);
}

TEST(SamplerCases, SampleSnr) {
  const ImagePlane plane{5.0, 1.0};
  const BSplineKernel k(6);
  const SampleGrid ref = sample_shape(kUnitCircle, plane, k, 256);
  EXPECT_TRUE(std::isinf(sample_snr(ref, ref)));
  EXPECT_NEAR(sample_snr(ref, add_noise(ref, 20.0, 1)), 20.0, 1e-9);
  double last = std::numeric_limits<double>::infinity();
  for (double r : {1.01, 1.05, 1.1}) {
    const double s = sample_snr(ref, sample_shape(gen_conic({0.0, 0.0}, {r, r}, 0.0), plane, k, 256));
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, last);
    last = s;
  }
}

TEST(MomentsCases, DiskFromSamples) {
  const ImagePlane plane{5.0, 1.0};
  const BSplineKernel k(6);
  const SampleGrid g = sample_shape(kUnitCircle, plane, k, 256);
  const MomentTable t = moments_from_samples(g, classical_coefficients(k, 2, g.k_range.lo, g.k_range.hi), 2, 2);
  EXPECT_NEAR(t.at(0, 0), std::numbers::pi, 1e-2);
  EXPECT_NEAR(t.at(1, 0), 0.0, 1e-2);
  EXPECT_NEAR(t.at(0, 1), 0.0, 1e-2);
}

TEST(MomentsCases, OracleDisk) {
  const MomentTable t = oracle_moments(kUnitCircle, ImagePlane{2.0, 1.0}, MomentWeight{}, 2, 2);
  EXPECT_NEAR(t.at(0, 0), std::numbers::pi, 1e-4);
  EXPECT_NEAR(t.at(2, 0), std::numbers::pi / 4.0, 1e-4);
}

TEST(MomentsCases, FilledPlane) {
  const ImagePlane plane{2.0, 1.0};
  const BSplineKernel k(6);
  const SampleGrid g = sample_shape(constant(-1.0), plane, k, 1024);
  const MomentTable t = moments_from_samples(g, classical_coefficients(k, 4, g.k_range.lo, g.k_range.hi), 4, 4);
  auto axis = [](int i) { return i % 2 ? 0.0 : 2.0 * std::pow(2.0, i + 1) / (i + 1); };
  for (int i = 0; i <= 4; ++i) {
    for (int j = 0; i + j <= 4; ++j) EXPECT_NEAR(t.at(i, j), axis(i) * axis(j), 1e-6 * (1.0 + axis(i) * axis(j)));
  }
  const MomentTable o = oracle_moments(constant(-1.0), plane, MomentWeight{}, 2, 2);
  EXPECT_NEAR(o.at(2, 2), axis(2) * axis(2), 1e-6 * axis(2) * axis(2));
}

TEST(MomentsCases, GeneralizedSimpleImages) {
  const ImagePlane plane{11.0, 1.0};
  const BSplineKernel k(6);
  const GMCoefficients gm = fit_gm(k, 6, 13);
  const SampleGrid empty = sample_shape(constant(1.0), plane, k, 16);
  const GeneralizedMoments z = generalized_moments_from_samples(empty, gm, 2, 2, 0, 0);
  EXPECT_EQ(z.gg.values.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(z.gpg.values.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(z.ggp.values.cwiseAbs().maxCoeff(), 0.0);
  const SampleGrid full = sample_shape(constant(-1.0), plane, k, 64);
  const GeneralizedMoments f = generalized_moments_from_samples(full, gm, 0, 0, 0, 0);
  const double ig = oracle::integrate([&](double x) { return gm.g(x); }, -11.0, 11.0, 0.5);
  EXPECT_NEAR(f.gg.at(0, 0), ig * ig, 1e-6 * ig * ig);
}

TEST(GMFitCases, QuadraticForm) {
  const GMProblem pb = build_gm_objective(BSplineKernel(4), 6, 10);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(pb.qp.H).eigenvalues();
  EXPECT_GE(ev.minCoeff(), -1e-9 * ev.maxCoeff());

  GMCoefficients unit = default_init(BSplineKernel(4), 2, 3);
  unit.c.setZero();
  unit.c_tilde.setZero();
  unit.c(0, 3) = 1.0;
  const double g = gm_objective(unit);
  EXPECT_TRUE(std::isfinite(g));
  EXPECT_NEAR(g, oracle::gm_objective(unit), 1e-10 * g);
}

TEST(GMFitCases, LargerIndexSetNeverHurts) {
  // The optimum for K, padded with zeros, is feasible for 2K; compare both in
  // the 2K measure.
  const BSplineKernel k(6);
  const GMCoefficients small = fit_gm(k, 6, 4);
  const GMCoefficients large = fit_gm(k, 6, 8);
  GMCoefficients padded = default_init(k, 6, 8);
  padded.c.setZero();
  padded.c_tilde.setZero();
  padded.c.middleCols(4, 9) = small.c;
  padded.c_tilde.middleCols(4, 9) = small.c_tilde;
  EXPECT_LE(large.objective, oracle::gm_objective(padded) * (1.0 + 1e-9));
}

TEST(GMFitCases, PublishedConfigurations) {
  for (const auto& [m, K] : std::vector<std::pair<int, int>>{{6, 13}, {4, 14}, {2, 20}}) {
    const GMCoefficients c = fit_gm(BSplineKernel(m), 6, K);
    EXPECT_EQ(c.window(), 2 * K + 1);
    EXPECT_NE(c.status, "infeasible");
    EXPECT_NEAR(c.coef(0, 0), 1.0, 1e-10);
    EXPECT_GE(check_positivity(c).min_grid, -1e-12);
  }
}

TEST(AnnihilateCases, UnitDisk) {
  const AnnihilationSystem sys = build_conventional(unit_disk_table(3), 2);
  EXPECT_EQ(sys.M.rows(), 8);
  Eigen::VectorXd a(6);
  a << -1.0, 0.0, 0.0, 1.0, 0.0, 1.0;
  EXPECT_EQ(kUnitCircle.coeffs(), a);
  EXPECT_LT((sys.M * a).norm() / (sys.M.norm() * a.norm()), 1e-8);
  const LSSolution ls = solve_ls(sys);
  const auto d = zero_set_distance(kUnitCircle, BivariatePolynomial(2, ls.a), ImagePlane{2.0, 1.0});
  ASSERT_TRUE(d.has_value());
  EXPECT_LT(*d, 1e-6);
}

TEST(AnnihilateCases, ZeroTableAndIdentityScale) {
  MomentTable zero = unit_disk_table(3);
  zero.values.setZero();
  EXPECT_EQ(build_conventional(zero, 2).M.cwiseAbs().maxCoeff(), 0.0);
  const AnnihilationSystem sys = build_conventional(unit_disk_table(3), 2);
  EXPECT_EQ(normalize_coordinates(sys, 1.0).M, sys.M);
  MomentTable low = unit_disk_table(2);
  EXPECT_THROW(build_conventional(low, 2), InputError);
}

TEST(AnnihilateCases, ScalingKeepsTheZeroSet) {
  const ImagePlane plane{2.0, 1.0};
  const BivariatePolynomial e = gen_conic({0.2, -0.1}, {1.2, 0.8}, 0.4);
  OracleOptions o;
  o.rows_per_unit = 4096;
  const AnnihilationSystem sys = build_conventional(oracle_moments(e, plane, MomentWeight{}, 3, 3, o), 2);
  const AnnihilationSystem scaled = normalize_coordinates(sys, 2.0);
  const BivariatePolynomial a(2, sys.to_global(solve_ls(sys).a));
  const BivariatePolynomial b(2, scaled.to_global(solve_ls(scaled).a));
  EXPECT_LT(*zero_set_distance(a, b, plane), 1e-6);
}

TEST(AnnihilateCases, ScalingImprovesConditioning) {
  const ImagePlane plane{11.0, 1.0};
  const BSplineKernel k(6);
  const GMCoefficients gm = fit_gm(k, 6, 13);
  const SampleGrid g = sample_shape(gen_bounded_quartic(1, plane), plane, k, 64);
  PipelineOptions opt;
  opt.mode = AnnihilationMode::Generalized;
  opt.sigma = 1.0;
  const AnnihilationSystem raw = pipeline_system(g, opt, &gm);
  opt.sigma = 13.0;
  const AnnihilationSystem scaled = pipeline_system(g, opt, &gm);
  EXPECT_LE(condition(scaled.M), condition(raw.M));
}

TEST(RecoverCases, NullVectorIsNormalized) {
  Eigen::VectorXd v(6);
  v << 2.0, -1.0, 0.5, 3.0, 0.0, 1.0;
  const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(6, 6) - v * v.transpose() / v.squaredNorm();
  AnnihilationSystem sys;
  sys.degree = 2;
  sys.M = Eigen::MatrixXd::Random(10, 6) * P;
  const LSSolution ls = solve_ls(sys);
  EXPECT_FALSE(ls.fallback);
  EXPECT_LT((ls.a - v / v[0]).norm(), 1e-10);
}

TEST(RecoverCases, SignClassification) {
  SampleGrid g;
  g.m = 0;
  g.plane = ImagePlane{3.0, 1.0};
  g.k_range = g.l_range = IndexRange{-2, 2};
  g.values = Eigen::MatrixXd::Constant(5, 5, 0.5);
  g.values(2, 2) = 1.0;  // (0, 0)
  g.values(3, 2) = 0.0;  // (1, 0)
  const SignConstraintSet s = infer_signs(g, 0.2);
  ASSERT_EQ(s.inside.size(), 1u);
  EXPECT_EQ(s.inside[0], std::make_pair(0, 0));
  ASSERT_EQ(s.outside.size(), 1u);
  EXPECT_EQ(s.outside[0], std::make_pair(1, 0));
  EXPECT_THROW(infer_signs(g, 0.5), InputError);
}

TEST(RecoverCases, TrueShapeSatisfiesSigns) {
  const ImagePlane plane{6.0, 1.0};
  const BivariatePolynomial p = gen_conic({0.5, -0.5}, {3.0, 2.2}, 0.2);
  const SampleGrid g = sample_shape(p, plane, BSplineKernel(2), 64);
  const SignConstraintSet s = infer_signs(g, 0.2);
  double min_out = std::numeric_limits<double>::infinity();
  for (const auto& [k, l] : s.inside) EXPECT_LE(p(k, l), 0.0);
  for (const auto& [k, l] : s.outside) min_out = std::min(min_out, p(k, l));
  EXPECT_GT(min_out, 0.0);
}

TEST(RecoverCases, SignQPWithoutConstraintsIsLeastSquares) {
  const AnnihilationSystem sys = build_conventional(unit_disk_table(3), 2);
  const SignQPSolution qp = solve_sign_qp(sys, SignConstraintSet{}, ImagePlane{2.0, 1.0});
  ASSERT_TRUE(qp.feasible);
  const Eigen::VectorXd ls = solve_ls(sys).a;
  EXPECT_LT((qp.a / qp.a[0] - ls).norm(), 1e-8);
}

TEST(RecoverCases, RefinementFixedPointAndContraction) {
  const ImagePlane plane{6.0, 1.0};
  const BSplineKernel k(2);
  const BivariatePolynomial p = gen_conic({0.3, 0.2}, {3.0, 3.0}, 0.0);
  const SampleGrid g = sample_shape(p, plane, k, 64);
  AnnihilationSystem sys;
  sys.degree = 2;
  const RefineResult fixed = refine_consistency(p.coeffs(), g, k, sys);
  EXPECT_LT((fixed.a - p.coeffs()).norm(), 1e-9 * p.coeffs().norm());

  Eigen::VectorXd a = p.coeffs();
  const Eigen::VectorXd r = Eigen::VectorXd::LinSpaced(a.size(), -1.0, 1.0);
  a.tail(a.size() - 1) += 1e-2 * r.tail(a.size() - 1).cwiseProduct(a.tail(a.size() - 1).cwiseAbs().cwiseMax(1.0));
  RefineOptions opt;
  opt.max_iter = 5;
  const RefineResult moved = refine_consistency(a, g, k, sys, opt);
  ASSERT_GE(moved.residual_trace.size(), 2u);
  EXPECT_LE(moved.residual_trace.back(), 0.1 * moved.residual_trace.front());
}

TEST(ShapegenCases, QuarticStaysOffTheBorder) {
  const ImagePlane plane{11.0, 1.0};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Raster r = render_shape(gen_bounded_quartic(seed, plane), plane, 8);
    for (int i = 0; i < r.width; ++i) {
      EXPECT_EQ(r.at(0, i), 0);
      EXPECT_EQ(r.at(r.height - 1, i), 0);
      EXPECT_EQ(r.at(i, 0), 0);
      EXPECT_EQ(r.at(i, r.width - 1), 0);
    }
  }
}

TEST(ShapegenCases, Conics) {
  const BivariatePolynomial e = gen_conic({0.0, 0.0}, {2.0, 1.0}, 0.0);
  EXPECT_NEAR(e(2.0, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(e(0.0, 1.0), 0.0, 1e-15);
  const Raster r = render_shape(e, ImagePlane{3.0, 1.0}, 128);
  EXPECT_NEAR(r.count() * r.pixel * r.pixel, 2.0 * std::numbers::pi, 0.005 * 2.0 * std::numbers::pi);
}

TEST(ShapegenCases, DegenerateBezier) {
  std::array<Eigen::Vector2d, 4> same;
  same.fill(Eigen::Vector2d(1.0, 1.0));
  EXPECT_THROW(gen_bezier_shape(same, ImagePlane{6.0, 1.0}), InputError);
}

TEST(MetricsCases, Annulus) {
  const ImagePlane plane{2.0, 1.0};
  const Evaluation e = evaluate(kUnitCircle, gen_conic({0.0, 0.0}, {1.1, 1.1}, 0.0), plane, 256);
  const double annulus = std::numbers::pi * (1.21 - 1.0) * 256.0 * 256.0;
  EXPECT_NEAR(static_cast<double>(e.differing_pixels), annulus, 0.01 * annulus);
  EXPECT_NEAR(e.psnr_db, 10.0 * std::log10(1024.0 * 1024.0 / e.differing_pixels), 1e-12);
}
