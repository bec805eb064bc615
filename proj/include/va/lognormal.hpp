/**
 * @file lognormal.hpp
 * @brief Closed-form log-normal machinery: transition density, truncated
 *        moments, the boundary-equation kernel and the European value U0.
 *
 * All integrals of piecewise-affine payoffs against the log-normal law are
 * evaluated exactly through normal CDFs.
 */
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "va/contract.hpp"
#include "va/mortality.hpp"
#include "va/numerics.hpp"

namespace va {

/// Law of Z_s where dZ = drift Z dt + sigma Z dW, Z_0 = z.
struct GbmLaw {
    double z = 1.0;
    double s = 1.0;
    double drift = 0.0;
    double sigma = 0.2;

    GbmLaw() = default;
    GbmLaw(double z_, double s_, double drift_, double sigma_) : z(z_), s(s_), drift(drift_), sigma(sigma_) {
        if (!(z > 0.0) || !(s > 0.0) || !(sigma > 0.0)) {
            throw std::invalid_argument("GbmLaw: need z > 0, s > 0, sigma > 0");
        }
    }

    [[nodiscard]] double mean() const noexcept { return z * std::exp(drift * s); }
    [[nodiscard]] double stdev_log() const noexcept { return sigma * std::sqrt(s); }
    [[nodiscard]] double mean_log() const noexcept { return std::log(z) + (drift - 0.5 * sigma * sigma) * s; }
};

[[nodiscard]] inline double density_phi(const GbmLaw& law, double y) {
    if (!(y > 0.0)) throw std::invalid_argument("density_phi: y must be positive");
    const double v = law.sigma * law.sigma * law.s;
    const double d = std::log(y / law.z) - (law.drift - 0.5 * law.sigma * law.sigma) * law.s;
    return std::exp(-d * d / (2.0 * v)) / (std::sqrt(2.0 * std::numbers::pi * v) * y);
}

/// P(Z_s > a).
[[nodiscard]] inline double tail_prob(const GbmLaw& law, double a) {
    if (!(a > 0.0)) return 1.0;
    if (std::isinf(a)) return 0.0;
    const double sd = law.stdev_log();
    const double d2 = (std::log(law.z / a) + (law.drift - 0.5 * law.sigma * law.sigma) * law.s) / sd;
    return normal_cdf(d2);
}

/// E[Z_s 1{Z_s > a}].
[[nodiscard]] inline double partial_mean(const GbmLaw& law, double a) {
    if (!(a > 0.0)) return law.mean();
    if (std::isinf(a)) return 0.0;
    const double sd = law.stdev_log();
    const double d1 = (std::log(law.z / a) + (law.drift + 0.5 * law.sigma * law.sigma) * law.s) / sd;
    return law.mean() * normal_cdf(d1);
}

/// E[(Z_s - 1)^+].
[[nodiscard]] inline double call_value(const GbmLaw& law) {
    return std::max(0.0, partial_mean(law, 1.0) - tail_prob(law, 1.0));
}

/// int_{b_level}^inf (mu_t (y - 1)^+ + f_t) Phi(y) dy.
[[nodiscard]] inline double kernel_integral(const GbmLaw& law, double b_level, double mu_t, double f_t) {
    if (b_level < 0.0) throw std::invalid_argument("kernel_integral: b_level must be non-negative");
    const double m = std::max(b_level, 1.0);
    return mu_t * (partial_mean(law, m) - tail_prob(law, m)) + f_t * tail_prob(law, b_level);
}

/// Value of the contract without surrender right, by Simpson in time at step <= T/2000.
[[nodiscard]] inline double european_value_U0(const ContractSpec& spec, const MortalityModel& m) {
    const double a = spec.alpha();
    const double sig = spec.sigma;
    auto bracket = [&](double t) {
        const double sq = std::sqrt(t);
        return std::exp(spec.g * t) * normal_cdf((sig / 2.0 + a / sig) * sq) +
               std::exp((spec.r - spec.c) * t) * normal_cdf((sig / 2.0 - a / sig) * sq);
    };
    const double running = simpson(
        [&](double t) {
            return survival_probability(m, 0.0, t) * std::exp(-spec.r * t) * force_of_mortality(m, t) * bracket(t);
        },
        0.0, spec.T, spec.T / 2000.0);
    const double terminal = std::exp(-spec.r * spec.T) * survival_probability(m, 0.0, spec.T) * bracket(spec.T);
    return spec.x0 * (running + terminal);
}

}  // namespace va
