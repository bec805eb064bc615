/**
 * @file test_boundary_solver.cpp
 * @brief Node residual against direct quadrature, Picard output on the
 *        benchmark contracts and the structural properties of the boundary.
 */
#include <gtest/gtest.h>

#include <cmath>

#include "va/boundary_solver.hpp"

using namespace va;

namespace {

ContractSpec contract_with(double K, double c = 0.025) {
    ContractSpec s;
    s.c = c;
    s.penalty = ExponentialPenalty{K};
    return s;
}

/// A boundary on `grid` that is not a fixed point, for residual checks.
Boundary wiggly_boundary(const TimeGrid& grid) {
    Boundary b;
    b.grid = grid;
    b.values.resize(grid.n + 1);
    for (int j = 0; j <= grid.n; ++j) {
        const double x = grid.t(j) / grid.T;
        b.values[j] = j == grid.n ? 1.0 : 0.55 + 0.3 * x + 0.05 * std::sin(7.0 * x);
    }
    b.values[3] = 0.0;
    b.values[4] = 1.4;  // above 1, exercises max(b, 1)
    return b;
}

/// E[g(Z_s) 1{Z_s > level}] with Z_0 = theta by Simpson on the log-normal density.
template <class G>
double expect_above(double theta, double s, double drift, double sigma, double level, G&& g) {
    const GbmLaw law(theta, s, drift, sigma);
    const double lo = std::max(law.mean_log() - 12.0 * law.stdev_log(), level > 0.0 ? std::log(level) : -kInf);
    const double hi = law.mean_log() + 12.0 * law.stdev_log();
    if (!(hi > lo)) return 0.0;
    return simpson([&](double x) { return g(std::exp(x)) * density_phi(law, std::exp(x)) * std::exp(x); }, lo, hi,
                   (hi - lo) / 4000.0);
}

double residual_by_quadrature(int j, double theta, const Boundary& cur, const ContractSpec& spec,
                              const MortalityModel& m, NearLag near) {
    const TimeGrid& g = cur.grid;
    const double tj = g.t(j);
    const double tau = spec.T - tj;
    double r = std::exp(-spec.c * tau) * survival_probability(m, tj, tau) *
               expect_above(theta, tau, spec.alpha(), spec.sigma, 1.0, [](double z) { return z - 1.0; });
    for (int i = j + 1; i <= g.n; ++i) {
        const double s = g.t(i) - tj;
        const double mu = force_of_mortality(m, g.t(i));
        const double f = f_function(spec, m, g.t(i));
        const double level = (i == j + 1 && near == NearLag::OwnLevel) ? theta : cur.values[i];
        const double e = expect_above(theta, s, spec.alpha(), spec.sigma, level,
                                      [&](double z) { return mu * std::max(z - 1.0, 0.0) + f; });
        r += g.dt() * std::exp(-spec.c * s) * survival_probability(m, tj, s) * e;
    }
    return r;
}

}  // namespace

TEST(TimeGrid, NodesAndValidation) {
    const TimeGrid g(200, 10.0);
    EXPECT_DOUBLE_EQ(g.dt(), 0.05);
    EXPECT_EQ(g.t(200), 10.0);
    EXPECT_DOUBLE_EQ(g.t(37), 1.85);
    EXPECT_THROW(TimeGrid(1, 10.0), std::invalid_argument);
    EXPECT_THROW(TimeGrid(10, 0.0), std::invalid_argument);
}

TEST(LambdaCap, MatchesIndependentAssembly) {
    const MortalityModel m;
    const ContractSpec s = contract_with(0.014);
    const double lambda = std::log(1.075);  // Gompertz aging rate bounds mu'/mu
    const double muT = force_of_mortality(m, 10.0);
    const double a = std::abs(s.alpha());
    const double fT = f_function(s, m, 10.0);
    const double expected = std::max(0.0, lambda + muT + s.c + a * std::exp(a * 10.0) - fT);
    EXPECT_NEAR(lambda_cap(s, m), expected, 1e-6);
    EXPECT_GE(lambda_cap(contract_with(0.03), m), 0.0);
}

TEST(Residual, ZeroMortalityAndZeroDriverLeavesDiscountedCall) {
    // With mu = 0 and K = c the driver vanishes identically.
    const MortalityModel m(ConstantForce{0.0}, 50.0);
    const ContractSpec s = contract_with(0.025, 0.025);
    const TimeGrid g(50, 10.0);
    const Boundary b = wiggly_boundary(g);
    for (int j : {0, 10, 49}) {
        for (double theta : {0.5, 1.0, 1.7}) {
            const double tau = 10.0 - g.t(j);
            const double expected = std::exp(-s.c * tau) * call_value(GbmLaw(theta, tau, s.alpha(), s.sigma));
            EXPECT_NEAR(residual(j, theta, b, s, m), expected, 1e-14);
            EXPECT_NEAR(residual(j, theta, b, s, m, NearLag::PreviousIterate), expected, 1e-14);
        }
    }
}

TEST(Residual, MatchesTwoDimensionalQuadrature) {
    const MortalityModel m;
    const ContractSpec s = contract_with(0.014);
    const TimeGrid g(40, 10.0);
    const Boundary b = wiggly_boundary(g);
    for (NearLag near : {NearLag::OwnLevel, NearLag::PreviousIterate}) {
        for (int j : {0, 2, 20, 39}) {
            for (double theta : {0.3, 0.9, 1.2}) {
                EXPECT_NEAR(residual(j, theta, b, s, m, near), residual_by_quadrature(j, theta, b, s, m, near), 1e-7)
                    << "j = " << j << " theta = " << theta;
            }
        }
    }
}

TEST(Residual, FastTableAgreesWithReference) {
    const MortalityModel m(GompertzMakeham{}, 65.0);
    const ContractSpec s = contract_with(0.018, 0.04);
    const TimeGrid g(60, 10.0);
    const Boundary b = wiggly_boundary(g);
    const detail::ResidualTable table(s, m, g);
    const auto prepared = table.prepare(b.values);
    for (NearLag near : {NearLag::OwnLevel, NearLag::PreviousIterate}) {
        for (int j = 0; j < g.n; j += 7) {
            for (double theta : {0.05, 0.6, 1.0, 2.0}) {
                EXPECT_NEAR(table(j, theta, prepared, near), residual(j, theta, b, s, m, near), 1e-12);
            }
        }
    }
}

TEST(Residual, LargeThetaIsPositiveAndArgumentsChecked) {
    const MortalityModel m;
    const ContractSpec s = contract_with(0.014);
    const TimeGrid g(40, 10.0);
    const Boundary b = wiggly_boundary(g);
    EXPECT_GT(residual(5, 50.0, b, s, m), 0.0);
    EXPECT_LT(residual(5, 1e-6, b, s, m), 0.0);
    EXPECT_THROW((void)residual(5, 0.0, b, s, m), std::invalid_argument);
    EXPECT_THROW((void)residual(40, 1.0, b, s, m), std::out_of_range);
}

TEST(Picard, BenchmarkBoundaryIsPositiveEverywhere) {
    const MortalityModel m;
    const ContractSpec s = contract_with(0.014);
    const Boundary b = picard_solve(s, m, TimeGrid(100, 10.0));
    EXPECT_EQ(b.t_star, 0.0);
    EXPECT_GT(b.values.front(), 0.0);
    EXPECT_EQ(b.values.back(), 1.0);
    EXPECT_LT(b.final_sup_change, 1e-4);
    EXPECT_EQ(static_cast<int>(b.change_history.size()), b.iterations);
    for (int j = 0; j < 100; ++j) {
        EXPECT_GT(b.values[j], 0.0);
        EXPECT_LT(b.values[j], 1.0);
    }
}

TEST(Picard, SteeperPenaltyDelaysTheRegion) {
    const MortalityModel m;
    const ContractSpec s = contract_with(0.022);
    const Boundary b = picard_solve(s, m, TimeGrid(100, 10.0));
    EXPECT_NEAR(b.t_star, 1.5, 0.05);
    for (int j = 0; j <= 100; ++j) {
        if (b.grid.t(j) < 1.5) {
            EXPECT_EQ(b.values[j], 0.0) << "t = " << b.grid.t(j);
        }
        if (b.grid.t(j) > b.t_star + 0.2) {
            EXPECT_GT(b.values[j], 0.0) << "t = " << b.grid.t(j);
        }
    }
}

TEST(Picard, PenaltyAtOrAboveFeeGivesEmptyRegion) {
    const MortalityModel m;
    for (double K : {0.025, 0.03}) {
        const Boundary b = picard_solve(contract_with(K), m, TimeGrid(50, 10.0));
        for (int j = 0; j < 50; ++j) EXPECT_EQ(b.values[j], 0.0);
        EXPECT_EQ(b.left_limit_at_maturity(), 0.0);
    }
}

TEST(Picard, StructuralInvariants) {
    const MortalityModel m;
    for (double K : {0.014, 0.018, 0.022}) {
        const ContractSpec s = contract_with(K);
        const Boundary b = picard_solve(s, m, TimeGrid(100, 10.0));
        bool entered = false;
        for (int j = 0; j < 100; ++j) {
            const double t = b.grid.t(j);
            EXPECT_LE(b.values[j], h_threshold(s, m, t) + 1e-12);
            if (j > 0) {
                EXPECT_GE(b.beta(j), b.beta(j - 1) - 1e-6) << "K = " << K << " t = " << t;
            }
            // The region is an up-set in time: once entered it persists to T.
            if (entered) {
                EXPECT_GT(b.values[j], 0.0);
            }
            entered = entered || b.values[j] > 0.0;
            if (b.values[j] > 0.0) {
                EXPECT_LT(std::abs(self_residual(j, b, s, m)), 1e-4);
            }
        }
    }
}

TEST(Picard, SweepOrdersReachTheSameBoundary) {
    const MortalityModel m;
    const ContractSpec s = contract_with(0.018, 0.04);
    const TimeGrid g(80, 10.0);
    PicardOptions gs;
    gs.order = SweepOrder::BackwardGaussSeidel;
    const Boundary a = picard_solve(s, m, g);
    const Boundary b = picard_solve(s, m, g, 1e-2, gs);
    for (int j = 0; j <= 80; ++j) EXPECT_NEAR(a.values[j], b.values[j], 1e-3);
    EXPECT_LE(b.iterations, a.iterations);
}

TEST(Picard, NearLagChoicesAgreeAwayFromMaturity) {
    const MortalityModel m;
    const ContractSpec s = contract_with(0.014);
    const TimeGrid g(100, 10.0);
    PicardOptions prev;
    prev.near_lag = NearLag::PreviousIterate;
    const Boundary own = picard_solve(s, m, g);
    const Boundary old = picard_solve(s, m, g, 1e-2, prev);
    for (int j = 0; j <= 80; ++j) EXPECT_NEAR(own.values[j], old.values[j], 0.02) << "t = " << g.t(j);
}

TEST(Picard, ExhaustedBudgetThrowsWithLastIterate) {
    const MortalityModel m;
    PicardOptions opt;
    opt.max_sweeps = 1;
    try {
        (void)picard_solve(contract_with(0.014), m, TimeGrid(40, 10.0), 1e-2, opt);
        FAIL() << "expected PicardDivergence";
    } catch (const PicardDivergence& e) {
        EXPECT_EQ(e.last_iterate().iterations, 1);
        EXPECT_EQ(e.last_iterate().values.size(), 41u);
        EXPECT_EQ(e.last_iterate().values.back(), 1.0);
    }
}

TEST(Picard, ArgumentValidation) {
    const MortalityModel m;
    const ContractSpec s = contract_with(0.014);
    EXPECT_THROW((void)picard_solve(s, m, TimeGrid(40, 10.0), 0.0), std::invalid_argument);
    EXPECT_THROW((void)picard_solve(s, m, TimeGrid(40, 9.0)), std::invalid_argument);
}

TEST(SurrenderCurve, MaturityLevelAndNeverSentinel) {
    const MortalityModel m;
    const ContractSpec s = contract_with(0.022);
    const Boundary b = picard_solve(s, m, TimeGrid(50, 10.0));
    const auto curve = surrender_curve(b, s);
    ASSERT_EQ(curve.size(), 51u);
    EXPECT_DOUBLE_EQ(curve.back().level, 100.0);
    EXPECT_TRUE(std::isinf(curve.front().level));
    for (std::size_t j = 0; j < curve.size(); ++j) {
        if (b.values[j] > 0.0) {
            EXPECT_NEAR(curve[j].level, 100.0 / b.values[j], 1e-12);
        }
    }
}

TEST(SurrenderCurve, HigherPenaltyRaisesTheLevel) {
    const MortalityModel m;
    const TimeGrid g(60, 10.0);
    std::vector<std::vector<SurrenderPoint>> curves;
    for (double K : {0.010, 0.014, 0.018}) {
        const ContractSpec s = contract_with(K);
        curves.push_back(surrender_curve(picard_solve(s, m, g), s));
    }
    for (int j = 0; j < 60; ++j) {
        EXPECT_LE(curves[0][j].level, curves[1][j].level + 1e-9) << "t = " << g.t(j);
        EXPECT_LE(curves[1][j].level, curves[2][j].level + 1e-9) << "t = " << g.t(j);
    }
}
