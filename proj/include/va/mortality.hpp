/**
 * @file mortality.hpp
 * @brief Force-of-mortality models, survival probabilities and life expectancy.
 *
 * Time is measured in years since contract issue; the policyholder's age at
 * issue is stored on the model so that mu(t) is the force at attained age
 * eta + t. A proportional-hazard factor scales the whole force by (1 + factor).
 */
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

#include "va/numerics.hpp"

namespace va {

/// mu(x) = A + B * C^x at attained age x.
struct GompertzMakeham {
    double A = 0.0001;
    double B = 0.00035;
    double C = 1.075;
};

struct ConstantForce {
    double mu0 = 0.01;
};

class MortalityModel {
public:
    using Kind = std::variant<GompertzMakeham, ConstantForce>;

    MortalityModel() : MortalityModel(GompertzMakeham{}, 50.0, 0.0) {}

    MortalityModel(Kind kind, double eta, double hazard_factor = 0.0)
        : kind_(kind), eta_(eta), hazard_factor_(hazard_factor) {
        if (!(eta >= 0.0)) throw std::invalid_argument("mortality: age at issue must be non-negative");
        if (!(hazard_factor > -1.0)) {
            throw std::invalid_argument("mortality: hazard factor must exceed -1");
        }
        if (const auto* gm = std::get_if<GompertzMakeham>(&kind_)) {
            if (!(gm->A >= 0.0) || !(gm->B > 0.0) || !(gm->C > 1.0)) {
                throw std::invalid_argument("mortality: Gompertz-Makeham needs A >= 0, B > 0, C > 1");
            }
        } else {
            if (!(std::get<ConstantForce>(kind_).mu0 >= 0.0)) {
                throw std::invalid_argument("mortality: constant force must be non-negative");
            }
        }
    }

    [[nodiscard]] const Kind& kind() const noexcept { return kind_; }
    [[nodiscard]] double eta() const noexcept { return eta_; }
    [[nodiscard]] double hazard_factor() const noexcept { return hazard_factor_; }
    [[nodiscard]] bool is_gompertz() const noexcept {
        return std::holds_alternative<GompertzMakeham>(kind_);
    }

    [[nodiscard]] MortalityModel with_eta(double eta) const { return {kind_, eta, hazard_factor_}; }
    [[nodiscard]] MortalityModel with_hazard_factor(double f) const { return {kind_, eta_, f}; }

private:
    Kind kind_;
    double eta_;
    double hazard_factor_;
};

namespace detail {
inline void require_time(double t, const char* what) {
    if (!(t >= 0.0)) throw std::invalid_argument(std::string(what) + ": time must be non-negative");
}
}  // namespace detail

/// mu(t) in 1/year at t years after issue.
[[nodiscard]] inline double force_of_mortality(const MortalityModel& m, double t) {
    detail::require_time(t, "force_of_mortality");
    const double scale = 1.0 + m.hazard_factor();
    if (const auto* gm = std::get_if<GompertzMakeham>(&m.kind())) {
        return scale * (gm->A + gm->B * std::pow(gm->C, m.eta() + t));
    }
    return scale * std::get<ConstantForce>(m.kind()).mu0;
}

/// Time derivative of mu.
[[nodiscard]] inline double force_of_mortality_derivative(const MortalityModel& m, double t) {
    detail::require_time(t, "force_of_mortality_derivative");
    if (const auto* gm = std::get_if<GompertzMakeham>(&m.kind())) {
        return (1.0 + m.hazard_factor()) * gm->B * std::pow(gm->C, m.eta() + t) * std::log(gm->C);
    }
    return 0.0;
}

/// Probability of surviving s more years given alive at t: exp(-int_0^s mu(t+u) du).
[[nodiscard]] inline double survival_probability(const MortalityModel& m, double t, double s) {
    detail::require_time(t, "survival_probability");
    detail::require_time(s, "survival_probability");
    const double scale = 1.0 + m.hazard_factor();
    if (const auto* gm = std::get_if<GompertzMakeham>(&m.kind())) {
        const double lnC = std::log(gm->C);
        const double integral =
            gm->A * s + gm->B * std::pow(gm->C, m.eta() + t) * std::expm1(s * lnC) / lnC;
        return std::exp(-scale * integral);
    }
    return std::exp(-scale * std::get<ConstantForce>(m.kind()).mu0 * s);
}

/// A lambda >= 0 with mu'(t) <= lambda * mu(t) for all t. For Gompertz-Makeham
/// the ratio mu'/mu is bounded by ln C independently of the horizon.
[[nodiscard]] inline double aging_rate_bound(const MortalityModel& m, double /*T*/) {
    if (const auto* gm = std::get_if<GompertzMakeham>(&m.kind())) return std::log(gm->C);
    return 0.0;
}

/// Curtate-free life expectancy at issue, truncated at attained age max_age.
[[nodiscard]] inline double life_expectancy(const MortalityModel& m, double max_age = 120.0) {
    const double horizon = max_age - m.eta();
    if (!(horizon > 0.0)) return 0.0;
    return simpson([&](double s) { return survival_probability(m, 0.0, s); }, 0.0, horizon,
                   1.0 / 365.0);
}

/// max of mu over [0, T]; mu is monotone for both supported families.
[[nodiscard]] inline double max_force_of_mortality(const MortalityModel& m, double T) {
    return std::max(force_of_mortality(m, 0.0), force_of_mortality(m, T));
}

}  // namespace va
