/**
 * @file contract.hpp
 * @brief Contract and market parameters, the surrender penalty, the running
 *        driver f(t), the first time t* at which f turns negative, the
 *        threshold h(t) and a report on the standing model assumptions.
 */
#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "va/mortality.hpp"
#include "va/numerics.hpp"

namespace va {

/// k(t) = 1 - exp(-K (T - t)).
struct ExponentialPenalty {
    double K = 0.014;
};

/// Surrender charge given at knots and joined by a natural cubic spline. The
/// interpolant must be non-increasing, end at zero and stay inside [0, 1].
class PiecewiseCubicPenalty {
public:
    explicit PiecewiseCubicPenalty(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots)) {
        if (knots_.size() < 2) throw std::invalid_argument("penalty: need at least two knots");
        std::vector<double> x, y;
        for (const auto& [t, k] : knots_) {
            x.push_back(t);
            y.push_back(k);
        }
        if (x.front() != 0.0) throw std::invalid_argument("penalty: first knot must be at t = 0");
        if (y.back() != 0.0) throw std::invalid_argument("penalty: k must vanish at the last knot");
        spline_ = CubicSpline(std::move(x), std::move(y));
        constexpr int kSamples = 4000;
        const double span = spline_.x_max();
        for (int i = 0; i <= kSamples; ++i) {
            const double t = span * i / kSamples;
            const double k = spline_(t);
            if (spline_.derivative(t) > 1e-12) {
                throw std::invalid_argument("penalty: interpolant is not non-increasing");
            }
            if (k < -1e-12 || k > 1.0 + 1e-12) {
                throw std::invalid_argument("penalty: interpolant leaves [0, 1]");
            }
        }
    }

    [[nodiscard]] const std::vector<std::pair<double, double>>& knots() const noexcept { return knots_; }
    [[nodiscard]] double last_knot() const noexcept { return spline_.x_max(); }
    [[nodiscard]] double value(double t) const { return spline_(t); }
    [[nodiscard]] double derivative(double t) const { return spline_.derivative(t); }
    [[nodiscard]] double second_derivative(double t) const { return spline_.second_derivative(t); }

private:
    std::vector<std::pair<double, double>> knots_;
    CubicSpline spline_;
};

using PenaltyModel = std::variant<ExponentialPenalty, PiecewiseCubicPenalty>;

struct ContractSpec {
    double T = 10.0;
    double r = 0.05;
    double sigma = 0.20;
    double c = 0.025;
    double g = 0.0;
    double x0 = 100.0;
    PenaltyModel penalty = ExponentialPenalty{};

    /// Drift of the inverse-moneyness process under the account-numeraire measure.
    [[nodiscard]] double alpha() const noexcept { return g + c - r; }

    void validate() const {
        if (!(T > 0.0)) throw std::invalid_argument("contract: T must be positive");
        if (!(sigma > 0.0)) throw std::invalid_argument("contract: sigma must be positive");
        if (!(r >= 0.0) || !(c >= 0.0) || !(g >= 0.0)) {
            throw std::invalid_argument("contract: r, c and g must be non-negative");
        }
        if (!(x0 > 0.0)) throw std::invalid_argument("contract: x0 must be positive");
        if (const auto* e = std::get_if<ExponentialPenalty>(&penalty)) {
            if (!(e->K >= 0.0)) throw std::invalid_argument("penalty: K must be non-negative");
        } else if (std::abs(std::get<PiecewiseCubicPenalty>(penalty).last_knot() - T) > 1e-12) {
            throw std::invalid_argument("penalty: last knot must sit at maturity T");
        }
    }
};

namespace detail {
inline void require_in_horizon(const ContractSpec& spec, double t) {
    if (!(t >= 0.0 && t <= spec.T)) {
        std::ostringstream os;
        os << "time " << t << " outside [0, " << spec.T << "]";
        throw std::out_of_range(os.str());
    }
}
}  // namespace detail

/// Surrender charge fraction k(t).
[[nodiscard]] inline double penalty(const ContractSpec& spec, double t) {
    detail::require_in_horizon(spec, t);
    if (const auto* e = std::get_if<ExponentialPenalty>(&spec.penalty)) {
        return -std::expm1(-e->K * (spec.T - t));
    }
    return std::get<PiecewiseCubicPenalty>(spec.penalty).value(t);
}

[[nodiscard]] inline double penalty_derivative(const ContractSpec& spec, double t) {
    detail::require_in_horizon(spec, t);
    if (const auto* e = std::get_if<ExponentialPenalty>(&spec.penalty)) {
        return -e->K * std::exp(-e->K * (spec.T - t));
    }
    return std::get<PiecewiseCubicPenalty>(spec.penalty).derivative(t);
}

[[nodiscard]] inline double penalty_second_derivative(const ContractSpec& spec, double t) {
    detail::require_in_horizon(spec, t);
    if (const auto* e = std::get_if<ExponentialPenalty>(&spec.penalty)) {
        return -e->K * e->K * std::exp(-e->K * (spec.T - t));
    }
    return std::get<PiecewiseCubicPenalty>(spec.penalty).second_derivative(t);
}

/// f(t) = k(t) (c + mu(t)) - k'(t) - c.
[[nodiscard]] inline double f_function(const ContractSpec& spec, const MortalityModel& m, double t) {
    return penalty(spec, t) * (spec.c + force_of_mortality(m, t)) - penalty_derivative(spec, t) - spec.c;
}

/// Equivalent form for the exponential penalty: mu k + (K - c) exp(-K (T - t)).
[[nodiscard]] inline double f_function_exponential(const ContractSpec& spec, const MortalityModel& m,
                                                   double t) {
    const auto& e = std::get<ExponentialPenalty>(spec.penalty);
    return force_of_mortality(m, t) * penalty(spec, t) + (e.K - spec.c) * std::exp(-e.K * (spec.T - t));
}

[[nodiscard]] inline double f_derivative(const ContractSpec& spec, const MortalityModel& m, double t) {
    return penalty_derivative(spec, t) * (spec.c + force_of_mortality(m, t)) +
           penalty(spec, t) * force_of_mortality_derivative(m, t) - penalty_second_derivative(spec, t);
}

inline constexpr int kTStarScanPoints = 10000;

/// First time f becomes negative, capped at T. Grid scan then bisection.
[[nodiscard]] inline double t_star(const ContractSpec& spec, const MortalityModel& m) {
    if (f_function(spec, m, 0.0) < 0.0) return 0.0;
    double prev = 0.0;
    for (int i = 1; i <= kTStarScanPoints; ++i) {
        const double t = spec.T * i / kTStarScanPoints;
        if (f_function(spec, m, t) < 0.0) {
            return bisect_predicate([&](double x) { return f_function(spec, m, x) < 0.0; }, prev, t, 200,
                                    1e-8);
        }
        prev = t;
    }
    return spec.T;
}

/// h(t) = (1 - f(t)/mu(t))^+, the level where the running reward H(t, .) vanishes.
[[nodiscard]] inline double h_threshold(const ContractSpec& spec, const MortalityModel& m, double t) {
    const double mu = force_of_mortality(m, t);
    if (!(mu > 0.0)) throw std::domain_error("h_threshold: force of mortality must be positive");
    return std::max(0.0, 1.0 - f_function(spec, m, t) / mu);
}

struct AssumptionClause {
    std::string name;
    bool passed = true;
    std::string detail;
    /// Individual alternatives (i) and (ii) are reported but only their
    /// disjunction is required.
    bool required = true;
};

struct AssumptionReport {
    std::vector<AssumptionClause> clauses;
    double t_star = 0.0;

    [[nodiscard]] bool all_passed() const {
        for (const auto& c : clauses) {
            if (c.required && !c.passed) return false;
        }
        return true;
    }
    [[nodiscard]] const AssumptionClause& clause(const std::string& name) const {
        for (const auto& c : clauses) {
            if (c.name == name) return c;
        }
        throw std::out_of_range("no assumption clause named " + name);
    }
};

inline constexpr double kDerivativeSignTol = 1e-12;
inline constexpr double kStrictNegativeTol = 1e-14;

/// Evaluates the regularity and sign-structure assumptions on a uniform grid.
/// Advisory only: violations are reported, never thrown.
[[nodiscard]] inline AssumptionReport check_assumptions(const ContractSpec& spec, const MortalityModel& m) {
    AssumptionReport rep;
    rep.t_star = t_star(spec, m);
    const double ts = rep.t_star;
    constexpr int N = kTStarScanPoints;
    auto at = [&](int i) { return spec.T * i / N; };

    auto first_failure = [&](auto&& ok, double from_exclusive, bool include_from) -> std::string {
        for (int i = 0; i <= N; ++i) {
            const double t = at(i);
            if (t < from_exclusive || (!include_from && t == from_exclusive)) continue;
            if (!ok(t)) {
                std::ostringstream os;
                os << "violated at t=" << t;
                return os.str();
            }
        }
        return {};
    };
    auto add = [&](std::string name, std::string failure) {
        rep.clauses.push_back({std::move(name), failure.empty(), failure.empty() ? "ok" : failure});
    };

    add("k_non_increasing",
        first_failure([&](double t) { return penalty_derivative(spec, t) <= kDerivativeSignTol; }, 0.0, true));
    add("k_in_unit_interval", first_failure(
                                  [&](double t) {
                                      const double k = penalty(spec, t);
                                      return k >= -1e-12 && k <= 1.0 + 1e-12;
                                  },
                                  0.0, true));
    add("k_twice_differentiable", {});
    add("k_terminal_zero", penalty(spec, spec.T) == 0.0 ? std::string{} : std::string{"k(T) != 0"});

    const double lambda = aging_rate_bound(m, spec.T);
    add("aging_rate_bound", first_failure(
                                [&](double t) {
                                    return force_of_mortality_derivative(m, t) <=
                                           lambda * force_of_mortality(m, t) * (1.0 + 1e-12) + kDerivativeSignTol;
                                },
                                0.0, true));

    // f >= 0 on [0, t*) and f < 0 strictly on (t*, T].
    std::string sign = first_failure([&](double t) { return t >= ts || f_function(spec, m, t) >= -kStrictNegativeTol; },
                                     0.0, true);
    if (sign.empty()) {
        sign = first_failure([&](double t) { return f_function(spec, m, t) < -kStrictNegativeTol; }, ts, false);
    }
    add("f_single_sign_change", sign);

    const std::string clause_i = first_failure(
        [&](double t) {
            return force_of_mortality_derivative(m, t) <= kDerivativeSignTol &&
                   f_derivative(spec, m, t) <= kDerivativeSignTol;
        },
        ts, false);
    const std::string clause_ii = first_failure(
        [&](double t) {
            return force_of_mortality_derivative(m, t) > 0.0 &&
                   f_derivative(spec, m, t) - force_of_mortality(m, t) * f_function(spec, m, t) <= kDerivativeSignTol;
        },
        ts, false);
    rep.clauses.push_back({"clause_i", clause_i.empty(), clause_i.empty() ? "ok" : clause_i, false});
    rep.clauses.push_back({"clause_ii", clause_ii.empty(), clause_ii.empty() ? "ok" : clause_ii, false});
    const bool either = clause_i.empty() || clause_ii.empty();
    rep.clauses.push_back({"clause_i_or_ii", either, either ? "ok" : "neither (i) nor (ii) holds on (t*, T]"});
    return rep;
}

}  // namespace va
