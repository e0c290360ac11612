#include "algshape/bspline.hpp"
#include "algshape/errors.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace algshape;

TEST(BSpline, MatchesTruncatedPowerFormula) {
  for (int m = 0; m <= 7; ++m) {
    const BSplineKernel k(m);
    for (double x = -4.6; x <= 4.6; x += 0.037) {
      EXPECT_NEAR(k(x), oracle::bspline(m, x), 1e-12) << "m=" << m << " x=" << x;
    }
  }
}

TEST(BSpline, SupportAndSymmetry) {
  const BSplineKernel k(6);
  EXPECT_DOUBLE_EQ(k.half_support(), 3.5);
  EXPECT_EQ(k(3.5), 0.0);
  EXPECT_EQ(k(-3.6), 0.0);
  for (double x = 0.0; x < 3.5; x += 0.1) EXPECT_NEAR(k(x), k(-x), 1e-15);
}

TEST(BSpline, PartitionOfUnity) {
  for (int m = 0; m <= 7; ++m) {
    const BSplineKernel k(m);
    for (double x = -2.0; x <= 2.0; x += 0.0137) {
      double s = 0.0;
      for (int j = -8; j <= 8; ++j) s += k(x - j);
      EXPECT_NEAR(s, 1.0, 1e-12) << "m=" << m;
    }
  }
}

TEST(BSpline, DerivativeMatchesOracle) {
  for (int m = 1; m <= 7; ++m) {
    const BSplineKernel k(m);
    for (double x = -4.3; x <= 4.3; x += 0.041) {
      EXPECT_NEAR(k.derivative(x), oracle::bspline_derivative(m, x), 1e-11);
    }
  }
  EXPECT_THROW(BSplineKernel(0).derivative(0.1), InputError);
}

TEST(BSpline, KernelMoments) {
  for (int m = 0; m <= 7; ++m) {
    const BSplineKernel k(m);
    EXPECT_NEAR(kernel_moment(k, 0), 1.0, 1e-13);
    EXPECT_NEAR(kernel_moment(k, 1), 0.0, 1e-13);
    // Sum of m + 1 independent uniforms on [-1/2, 1/2].
    EXPECT_NEAR(kernel_moment(k, 2), (m + 1) / 12.0, 1e-13);
  }
}

TEST(BSpline, GaussLegendreIntegratesPolynomials) {
  const auto [x, w] = gauss_legendre(5);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * std::pow(x[i], 8);
  EXPECT_NEAR(acc, 2.0 / 9.0, 1e-14);
}

TEST(BSpline, GramIntegralsAgainstQuadrature) {
  for (int m : {2, 4, 6}) {
    const BSplineKernel k(m);
    for (int w = 0; w <= 3; ++w) {
      for (int f1 = 0; f1 <= 1; ++f1) {
        for (int f2 = 0; f2 <= 1; ++f2) {
          for (int a = -2; a <= 2; ++a) {
            const int b = 1;
            const double got = gram_integrals(k, w, {f1 == 1, f2 == 1}, a, b);
            const double want = oracle::integrate(
                [&](double x) {
                  const double u = f1 ? oracle::bspline_derivative(m, x - a) : oracle::bspline(m, x - a);
                  const double v = f2 ? oracle::bspline_derivative(m, x - b) : oracle::bspline(m, x - b);
                  return std::pow(x, w) * u * v;
                },
                -8.0, 8.0, 0.5);
            EXPECT_NEAR(got, want, 1e-11 * (1.0 + std::abs(want)));
          }
        }
      }
    }
  }
}

TEST(BSpline, GramSymmetry) {
  const BSplineKernel k(4);
  for (int w = 0; w <= 4; ++w) {
    for (int a = -3; a <= 3; ++a) {
      for (int b = -3; b <= 3; ++b) {
        EXPECT_NEAR(gram_integrals(k, w, {false, false}, a, b), gram_integrals(k, w, {false, false}, b, a), 1e-13);
        EXPECT_NEAR(gram_integrals(k, w, {true, false}, a, b), gram_integrals(k, w, {false, true}, b, a), 1e-13);
      }
    }
  }
}

TEST(BSpline, ClassicalReproduction) {
  for (int m : {2, 3, 6}) {
    const BSplineKernel k(m);
    const ClassicalReproduction r = classical_coefficients(k, m, -12, 12);
    for (int i = 0; i <= m; ++i) {
      for (double x = -5.0; x <= 5.0; x += 0.173) {
        double s = 0.0;
        for (int j = r.k_min; j <= r.k_max; ++j) s += r.c(i, j) * k(x - j);
        EXPECT_NEAR(s, std::pow(x, i), 1e-8 * (1.0 + std::pow(std::abs(x), i)));
      }
    }
  }
  EXPECT_THROW(classical_coefficients(BSplineKernel(2), 3, -5, 5), InputError);
}

TEST(BSpline, ReproductionJsonRoundTrip) {
  const ClassicalReproduction r = classical_coefficients(BSplineKernel(4), 3, -6, 6);
  const ClassicalReproduction back = classical_from_json(to_json(r));
  EXPECT_EQ(back.k_min, r.k_min);
  EXPECT_EQ(back.order, r.order);
  EXPECT_TRUE(back.table.isApprox(r.table, 1e-15));
}
