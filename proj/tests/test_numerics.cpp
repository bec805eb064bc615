/**
 * @file test_numerics.cpp
 * @brief Normal CDF against tabulated values, quadrature rules against exact
 *        integrals, bisection and spline reproduction.
 */
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "va/numerics.hpp"

using namespace va;

TEST(NormalCdf, MatchesHighPrecisionTable) {
    struct Row {
        double x;
        double p;
    };
    // Reference values computed to 16+ digits with arbitrary precision arithmetic.
    const Row rows[] = {
        {0.0, 0.5},
        {-1.0, 0.15865525393145705},
        {1.96, 0.97500210485177957},
        {3.0, 0.99865010196836990},
        {-5.0, 2.8665157187919391e-07},
        {-10.0, 7.6198530241605261e-24},
        {-37.5, 4.6053530095819548e-308},
    };
    for (const auto& r : rows) {
        EXPECT_NEAR(normal_cdf(r.x) / r.p, 1.0, 1e-12) << "x = " << r.x;
    }
}

TEST(NormalCdf, SymmetryAndDensity) {
    for (double x = -6.0; x <= 6.0; x += 0.37) {
        EXPECT_NEAR(normal_cdf(x) + normal_cdf(-x), 1.0, 1e-15);
        const double h = 1e-5;
        EXPECT_NEAR((normal_cdf(x + h) - normal_cdf(x - h)) / (2 * h), normal_pdf(x), 1e-9);
    }
}

TEST(Simpson, ExactForCubicsAndConvergentForSmooth) {
    auto cubic = [](double x) { return 2 * x * x * x - x + 3; };
    // Antiderivative x^4/2 - x^2/2 + 3x on [-1, 2]: (8 - 2 + 6) - (0.5 - 0.5 - 3) = 15.
    EXPECT_NEAR(simpson(cubic, -1.0, 2.0, 1.0), 15.0, 1e-12);
    EXPECT_NEAR(simpson([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-2), std::exp(1.0) - 1.0, 1e-10);
    EXPECT_EQ(simpson([](double) { return 1.0; }, 1.0, 1.0, 0.1), 0.0);
}

TEST(Trapezoid, LinearIsExact) {
    std::vector<double> v;
    for (int i = 0; i <= 10; ++i) v.push_back(1.0 + 0.5 * i * 0.1);
    EXPECT_NEAR(trapezoid(v, 0.1), 1.0 + 0.25, 1e-14);
    EXPECT_EQ(trapezoid(std::vector<double>{1.0}, 0.1), 0.0);
}

TEST(Bisection, FindsCrossing) {
    const double root = bisect_predicate([](double x) { return x * x > 2.0; }, 0.0, 2.0);
    EXPECT_NEAR(root, std::sqrt(2.0), 1e-9);
}

TEST(CubicSpline, ReproducesLinearDataAndInterpolates) {
    std::vector<double> x{0.0, 1.0, 2.5, 4.0};
    std::vector<double> y{1.0, 3.0, 6.0, 9.0};
    CubicSpline s(x, y);
    for (double t = 0.0; t <= 4.0; t += 0.1) {
        EXPECT_NEAR(s(t), 1.0 + 2.0 * t, 1e-12);
        EXPECT_NEAR(s.derivative(t), 2.0, 1e-12);
        EXPECT_NEAR(s.second_derivative(t), 0.0, 1e-12);
    }
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(s(x[i]), y[i]);
}

TEST(CubicSpline, NaturalEndConditionsAndAccuracy) {
    std::vector<double> x, y;
    for (int i = 0; i <= 40; ++i) {
        x.push_back(i * 0.1);
        y.push_back(std::sin(x.back()));
    }
    CubicSpline s(x, y);
    EXPECT_NEAR(s.second_derivative(0.0), 0.0, 1e-12);
    EXPECT_NEAR(s.second_derivative(4.0), 0.0, 1e-12);
    for (double t = 0.5; t < 3.5; t += 0.013) EXPECT_NEAR(s(t), std::sin(t), 1e-5);
}

TEST(CubicSpline, RejectsBadInput) {
    EXPECT_THROW(CubicSpline({0.0}, {1.0}), std::invalid_argument);
    EXPECT_THROW(CubicSpline({0.0, 0.0}, {1.0, 2.0}), std::invalid_argument);
    EXPECT_THROW(CubicSpline({0.0, 1.0}, {1.0}), std::invalid_argument);
}
