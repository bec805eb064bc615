/**
 * @file test_contract.cpp
 * @brief Penalty, driver f, t*, h and the assumption report.
 */
#include <gtest/gtest.h>

#include <cmath>

#include "va/contract.hpp"

using namespace va;

namespace {

ContractSpec with_K(double K) {
    ContractSpec s;
    s.penalty = ExponentialPenalty{K};
    return s;
}

ContractSpec flat_zero_penalty() {
    ContractSpec s;
    s.penalty = PiecewiseCubicPenalty({{0.0, 0.0}, {10.0, 0.0}});
    return s;
}

}  // namespace

TEST(Penalty, ExponentialValuesAndDerivatives) {
    const ContractSpec s = with_K(0.014);
    EXPECT_NEAR(penalty(s, 0.0), 1.0 - std::exp(-0.14), 1e-15);
    EXPECT_EQ(penalty(s, 10.0), 0.0);
    for (double t = 0.1; t < 10.0; t += 0.7) {
        const double h = 1e-5;
        EXPECT_NEAR(penalty_derivative(s, t), (penalty(s, t + h) - penalty(s, t - h)) / (2 * h), 1e-10);
        EXPECT_NEAR(penalty_second_derivative(s, t),
                    (penalty_derivative(s, t + h) - penalty_derivative(s, t - h)) / (2 * h), 1e-9);
    }
    EXPECT_THROW((void)penalty(s, 10.5), std::out_of_range);
    EXPECT_THROW((void)penalty(s, -0.1), std::out_of_range);
}

TEST(Penalty, CubicKnotsInterpolateAndValidate) {
    ContractSpec s;
    s.penalty = PiecewiseCubicPenalty({{0.0, 0.07}, {3.0, 0.05}, {6.0, 0.02}, {10.0, 0.0}});
    EXPECT_NEAR(penalty(s, 3.0), 0.05, 1e-15);
    EXPECT_EQ(penalty(s, 10.0), 0.0);
    EXPECT_LE(penalty_derivative(s, 5.0), 0.0);
    EXPECT_NO_THROW(s.validate());

    EXPECT_THROW(PiecewiseCubicPenalty({{0.0, 0.05}, {5.0, 0.08}, {10.0, 0.0}}), std::invalid_argument);
    EXPECT_THROW(PiecewiseCubicPenalty({{1.0, 0.05}, {10.0, 0.0}}), std::invalid_argument);
    EXPECT_THROW(PiecewiseCubicPenalty({{0.0, 0.05}, {10.0, 0.01}}), std::invalid_argument);
    EXPECT_THROW(PiecewiseCubicPenalty({{0.0, 1.5}, {10.0, 0.0}}), std::invalid_argument);

    ContractSpec short_knots;
    short_knots.penalty = PiecewiseCubicPenalty({{0.0, 0.05}, {8.0, 0.0}});
    EXPECT_THROW(short_knots.validate(), std::invalid_argument);
}

TEST(DriverF, TwoFormsAgreeForExponentialPenalty) {
    const MortalityModel m;
    for (double K : {0.01, 0.014, 0.022, 0.03}) {
        const ContractSpec s = with_K(K);
        for (int i = 0; i <= 1000; ++i) {
            const double t = 10.0 * i / 1000.0;
            EXPECT_NEAR(f_function(s, m, t), f_function_exponential(s, m, t), 1e-14);
        }
    }
}

TEST(DriverF, DerivativeMatchesFiniteDifference) {
    const MortalityModel m;
    const ContractSpec s = with_K(0.022);
    for (double t = 0.3; t < 9.8; t += 0.9) {
        const double h = 1e-5;
        EXPECT_NEAR(f_derivative(s, m, t), (f_function(s, m, t + h) - f_function(s, m, t - h)) / (2 * h), 1e-9);
    }
}

TEST(TStar, BenchmarkCases) {
    const MortalityModel m;
    EXPECT_EQ(t_star(with_K(0.014), m), 0.0);
    EXPECT_NEAR(t_star(with_K(0.022), m), 1.5, 0.05);
    ContractSpec equal = with_K(0.025);
    EXPECT_EQ(t_star(equal, m), equal.T);
    EXPECT_EQ(t_star(with_K(0.03), m), 10.0);
}

TEST(TStar, SignStructureAndMonotoneInK) {
    const MortalityModel m;
    double prev = 0.0;
    for (double K = 0.010; K <= 0.0241; K += 0.002) {
        const ContractSpec s = with_K(K);
        const double ts = t_star(s, m);
        EXPECT_GE(ts, prev - 1e-12) << "K = " << K;
        prev = ts;
        if (ts > 0.0 && ts < s.T) {
            EXPECT_GE(f_function(s, m, ts - 1e-6), 0.0);
            EXPECT_LT(f_function(s, m, std::min(s.T, ts + 1e-6)), 0.0);
        }
    }
}

TEST(HThreshold, AlgebraAndClamp) {
    const MortalityModel m;
    const ContractSpec s = with_K(0.014);
    const double muT = force_of_mortality(m, 10.0);
    EXPECT_NEAR(h_threshold(s, m, 10.0), 1.0 + (s.c - 0.014) / muT, 1e-12);
    // With k = 0, f = -c so h = 1 + c / mu.
    const ContractSpec zero = flat_zero_penalty();
    EXPECT_NEAR(h_threshold(zero, m, 4.0), 1.0 + zero.c / force_of_mortality(m, 4.0), 1e-12);
    // A large penalty drives f above mu: h clamps at zero.
    ContractSpec steep = with_K(0.5);
    EXPECT_EQ(h_threshold(steep, m, 0.0), 0.0);
    EXPECT_THROW((void)h_threshold(s, MortalityModel(ConstantForce{0.0}, 50.0), 1.0), std::domain_error);
}

TEST(HThreshold, PositiveAfterTStar) {
    const MortalityModel m;
    const ContractSpec s = with_K(0.022);
    const double ts = t_star(s, m);
    for (double t = ts + 0.01; t <= s.T; t += 0.2) EXPECT_GT(h_threshold(s, m, t), 0.0);
}

TEST(Assumptions, BenchmarkPassesThroughClauseTwo) {
    const AssumptionReport rep = check_assumptions(with_K(0.014), MortalityModel{});
    EXPECT_TRUE(rep.all_passed());
    EXPECT_TRUE(rep.clause("clause_ii").passed);
    EXPECT_FALSE(rep.clause("clause_i").passed);
    EXPECT_EQ(rep.t_star, 0.0);
    EXPECT_TRUE(check_assumptions(with_K(0.022), MortalityModel{}).all_passed());
}

TEST(Assumptions, ZeroPenaltyWithIncreasingMortalityFails) {
    const AssumptionReport rep = check_assumptions(flat_zero_penalty(), MortalityModel{});
    EXPECT_FALSE(rep.all_passed());
    EXPECT_FALSE(rep.clause("clause_i_or_ii").passed);
}

TEST(Assumptions, ConstantMortalityWithModestK) {
    const MortalityModel m(ConstantForce{0.01}, 50.0);
    EXPECT_TRUE(check_assumptions(with_K(0.014), m).all_passed());  // K <= c + mu
    EXPECT_TRUE(check_assumptions(with_K(0.034), m).clause("clause_i").passed);
}

TEST(ContractSpec, Validation) {
    ContractSpec s;
    EXPECT_NO_THROW(s.validate());
    EXPECT_DOUBLE_EQ(s.alpha(), 0.0 + 0.025 - 0.05);
    s.sigma = 0.0;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = ContractSpec{};
    s.x0 = -1.0;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = ContractSpec{};
    s.penalty = ExponentialPenalty{-0.01};
    EXPECT_THROW(s.validate(), std::invalid_argument);
}
