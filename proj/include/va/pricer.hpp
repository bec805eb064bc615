/**
 * @file pricer.hpp
 * @brief Value functions, the contract price with and without surrender
 *        right, the embedded surrender option and fair-fee calibration.
 *
 * w(t, z) is the early-exercise premium of the shifted value u(t, z) - (1 - k(t)),
 * written as a European part plus the running reward integrated over the
 * continuation region. v(t, x) = x u(t, x0 e^{gt} / x).
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "va/boundary_solver.hpp"
#include "va/contract.hpp"
#include "va/lognormal.hpp"
#include "va/mortality.hpp"

namespace va {

/// Raised when the two pricing routes disagree or a value leaves its range.
class PricingInconsistency : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PricingResult {
    double V0 = 0.0;
    double U0 = 0.0;
    double V_SO = 0.0;
    double w01 = 0.0;
    double V0_measure_check = 0.0;  ///< V0 through the risk-neutral account-value formula
    double route_gap = 0.0;         ///< |V0 - V0_measure_check|
    double U0_grid = 0.0;           ///< European value on the boundary's time grid
    Boundary boundary;
};

/// Integrand of the w-representation at lag s >= 0 from time t: discounted,
/// survival-weighted E[H(t+s, Z_s) 1{Z_s > b(t+s)}].
namespace detail {
inline double running_term(double t, double s, double z, double b_level, const ContractSpec& spec,
                           const MortalityModel& m) {
    const double ts = t + s;
    const double mu = force_of_mortality(m, ts);
    const double f = f_function(spec, m, ts);
    if (s <= 0.0) {
        return z > b_level ? mu * std::max(z - 1.0, 0.0) + f : 0.0;
    }
    return std::exp(-spec.c * s) * survival_probability(m, t, s) *
           kernel_integral(GbmLaw(z, s, spec.alpha(), spec.sigma), b_level, mu, f);
}

/// Integration nodes t, then every grid node strictly after t.
inline std::vector<double> nodes_from(double t, const TimeGrid& grid) {
    std::vector<double> pts{t};
    for (int i = 0; i <= grid.n; ++i) {
        const double ti = grid.t(i);
        if (ti > t + 1e-12) pts.push_back(ti);
    }
    return pts;
}
}  // namespace detail

/// w(t, z) before flooring at zero: trapezoid in time on the boundary grid
/// restricted to [t, T]. Negative values mean the boundary is worse than never
/// surrendering from (t, z).
[[nodiscard]] inline double value_w_unfloored(double t, double z, const Boundary& b, const ContractSpec& spec,
                                              const MortalityModel& m) {
    if (!(t >= 0.0 && t <= spec.T)) throw std::out_of_range("value_w: t outside [0, T]");
    if (!(z > 0.0)) throw std::invalid_argument("value_w: z must be positive");
    const double tau = spec.T - t;
    if (tau <= 1e-12) return std::max(z - 1.0, 0.0);
    double w = std::exp(-spec.c * tau) * survival_probability(m, t, tau) *
               call_value(GbmLaw(z, tau, spec.alpha(), spec.sigma));
    const auto pts = detail::nodes_from(t, b.grid);
    double prev = detail::running_term(t, 0.0, z, b.at(t), spec, m);
    for (std::size_t k = 1; k < pts.size(); ++k) {
        const double s = pts[k] - t;
        const double level = k + 1 == pts.size() ? b.left_limit_at_maturity() : b.at(pts[k]);
        const double cur = detail::running_term(t, s, z, level, spec, m);
        w += 0.5 * (pts[k] - pts[k - 1]) * (prev + cur);
        prev = cur;
    }
    return w;
}

/// w(t, z) = u(t, z) - (1 - k(t)) >= 0, the excess over surrendering now.
[[nodiscard]] inline double value_w(double t, double z, const Boundary& b, const ContractSpec& spec,
                                    const MortalityModel& m) {
    return std::max(value_w_unfloored(t, z, b, spec, m), 0.0);
}

/// u(t, z) = w(t, z) + 1 - k(t).
[[nodiscard]] inline double value_u(double t, double z, const Boundary& b, const ContractSpec& spec,
                                    const MortalityModel& m) {
    return value_w(t, z, b, spec, m) + 1.0 - penalty(spec, t);
}

/// Contract value at time t for account value x.
[[nodiscard]] inline double value_v(double t, double x, const Boundary& b, const ContractSpec& spec,
                                    const MortalityModel& m) {
    if (!(x > 0.0)) throw std::invalid_argument("value_v: account value must be positive");
    return x * value_u(t, spec.x0 * std::exp(spec.g * t) / x, b, spec, m);
}

/// V0 written under the pricing measure with the surrender curve l = x0 e^{gs} / b(s):
///   e^{-rT} p(0,T) E[max(x0 e^{gT}, X_T)]
///   + int e^{-rs} p(0,s) { (mu - f) E[X_s 1{X_s >= l}] + mu E[max(x0 e^{gs}, X_s) 1{X_s < l}] } ds.
[[nodiscard]] inline double contract_value_risk_neutral(const Boundary& b, const ContractSpec& spec,
                                                        const MortalityModel& m) {
    const double drift = spec.r - spec.c;
    auto guarantee = [&](double s) { return spec.x0 * std::exp(spec.g * s); };
    // E[max(G, X) 1{X < l}] and E[X 1{X >= l}] for X ~ account value at s.
    auto pieces = [&](double s, double level) -> std::pair<double, double> {
        const double G = guarantee(s);
        if (s <= 0.0) {
            const double x = spec.x0;
            return x < level ? std::pair{std::max(G, x), 0.0} : std::pair{0.0, x};
        }
        const GbmLaw law(spec.x0, s, drift, spec.sigma);
        const double above = partial_mean(law, level);
        double below = 0.0;
        if (level <= G) {
            below = G * (1.0 - tail_prob(law, level));
        } else {
            below = G * (1.0 - tail_prob(law, G)) + partial_mean(law, G) - above;
        }
        return {below, above};
    };
    auto integrand = [&](double s) {
        const double bs = s >= spec.T ? b.left_limit_at_maturity() : b.at(s);
        const double level = bs > 0.0 ? guarantee(s) / bs : kInf;
        const auto [below, above] = pieces(s, level);
        const double mu = force_of_mortality(m, s);
        const double f = f_function(spec, m, s);
        return std::exp(-spec.r * s) * survival_probability(m, 0.0, s) * ((mu - f) * above + mu * below);
    };
    const TimeGrid& grid = b.grid;
    std::vector<double> vals(grid.n + 1);
    for (int i = 0; i <= grid.n; ++i) vals[i] = integrand(grid.t(i));
    const double running = trapezoid(vals, grid.dt());

    const GbmLaw terminal(spec.x0, spec.T, drift, spec.sigma);
    const double G = guarantee(spec.T);
    const double e_max = G + partial_mean(terminal, G) - G * tail_prob(terminal, G);
    return std::exp(-spec.r * spec.T) * survival_probability(m, 0.0, spec.T) * e_max + running;
}

inline constexpr double kRouteTolerance = 0.005;  ///< fraction of x0

/// Prices the contract from a solved boundary. Both the account-numeraire
/// route and the risk-neutral route are evaluated; the first is reported.
[[nodiscard]] inline PricingResult price_V0(const ContractSpec& spec, const MortalityModel& m, const Boundary& b) {
    PricingResult res;
    res.boundary = b;
    res.U0 = european_value_U0(spec, m);
    res.w01 = value_w(0.0, 1.0, b, spec, m);
    const double surrender_now = spec.x0 * (1.0 - penalty(spec, 0.0));

    bool empty_region = true;
    for (int j = 0; j < b.grid.n; ++j) empty_region = empty_region && !(b.values[j] > 0.0);
    // Z_0 = 1 at or below b(0): the holder surrenders at once under either measure.
    const bool immediate = b.values.front() >= 1.0;
    const double V0_raw = spec.x0 * value_w_unfloored(0.0, 1.0, b, spec, m) + surrender_now;
    if (immediate) {
        res.V0 = surrender_now;
        res.V0_measure_check = surrender_now;
        res.route_gap = 0.0;
    } else {
        // With no surrender region the contract is its European counterpart.
        res.V0 = empty_region ? res.U0 : spec.x0 * res.w01 + surrender_now;
        res.V0_measure_check = contract_value_risk_neutral(b, spec, m);
        // Compared before flooring: near the boundary both routes carry the
        // same O(dt) quadrature error, which can dip below surrender-now.
        res.route_gap = std::abs(V0_raw - res.V0_measure_check);
    }
    if (res.route_gap > kRouteTolerance * spec.x0) {
        std::ostringstream os;
        os << "price_V0: routes disagree by " << res.route_gap << " (V0=" << res.V0
           << ", risk-neutral=" << res.V0_measure_check << ")";
        throw PricingInconsistency(os.str());
    }
    // The sign test runs against the European value on the same quadrature, so
    // first-order grid error in V0 does not masquerade as a negative option.
    Boundary never = b;
    std::fill(never.values.begin(), never.values.end() - 1, 0.0);
    res.U0_grid = spec.x0 * value_w_unfloored(0.0, 1.0, never, spec, m) + surrender_now;
    const double so_grid = (immediate ? surrender_now : V0_raw) - res.U0_grid;
    if (so_grid < -1e-6 * spec.x0) {
        std::ostringstream os;
        os << "price_V0: negative surrender option value " << so_grid;
        throw PricingInconsistency(os.str());
    }
    res.V_SO = std::max(0.0, res.V0 - res.U0);
    return res;
}

struct SolverSettings {
    int n = 200;
    double eps = 1e-2;
    PicardOptions picard{};
};

/// Solves the boundary and prices in one call.
[[nodiscard]] inline PricingResult price_contract(const ContractSpec& spec, const MortalityModel& m,
                                                  const SolverSettings& settings = {}) {
    const Boundary b = picard_solve(spec, m, TimeGrid(settings.n, spec.T), settings.eps, settings.picard);
    return price_V0(spec, m, b);
}

[[nodiscard]] inline double surrender_option_value(const ContractSpec& spec, const MortalityModel& m,
                                                   const Boundary& b) {
    return price_V0(spec, m, b).V_SO;
}

/// Raised when the fee bracket does not straddle par.
class CalibrationError : public std::runtime_error {
public:
    CalibrationError(const std::string& what, double v_lo, double v_hi)
        : std::runtime_error(what), v_lo_(v_lo), v_hi_(v_hi) {}
    [[nodiscard]] double value_at_lo() const noexcept { return v_lo_; }
    [[nodiscard]] double value_at_hi() const noexcept { return v_hi_; }

private:
    double v_lo_;
    double v_hi_;
};

struct FairFeeResult {
    double fee = 0.0;
    double V0 = 0.0;  ///< contract value at the returned fee
    int evaluations = 0;
};

/// Fee c* with V0(c*) = x0, by bisection on c to 1e-4 absolute. Every
/// evaluation re-solves the boundary.
[[nodiscard]] inline FairFeeResult fair_fee(ContractSpec spec, const MortalityModel& m, double c_lo, double c_hi,
                                            const SolverSettings& settings = {}, double tol = 1e-4) {
    if (!(c_hi > c_lo) || c_lo < 0.0) throw std::invalid_argument("fair_fee: need 0 <= c_lo < c_hi");
    FairFeeResult out;
    auto excess = [&](double c) {
        spec.c = c;
        ++out.evaluations;
        return price_contract(spec, m, settings).V0 - spec.x0;
    };
    const double e_lo = excess(c_lo);
    const double e_hi = excess(c_hi);
    if (!(e_lo > 0.0 && e_hi < 0.0)) {
        std::ostringstream os;
        os << "fair_fee: bracket [" << c_lo << ", " << c_hi << "] does not straddle par (V0 - x0 = " << e_lo
           << ", " << e_hi << ")";
        throw CalibrationError(os.str(), e_lo + spec.x0, e_hi + spec.x0);
    }
    double lo = c_lo;
    double hi = c_hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (excess(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    out.fee = 0.5 * (lo + hi);
    spec.c = out.fee;
    out.V0 = price_contract(spec, m, settings).V0;
    ++out.evaluations;
    return out;
}

}  // namespace va
