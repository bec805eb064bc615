/**
 * @file boundary_solver.hpp
 * @brief Optimal surrender boundary in inverse-moneyness units, computed by
 *        Picard iteration on the discretised boundary integral equation.
 *
 * The state variable is Z = x0 e^{gt} / X, which under the account numeraire
 * is a geometric Brownian motion with drift alpha = g + c - r. Surrender is
 * optimal when Z falls to b(t); in account units that is X >= x0 e^{gt}/b(t).
 *
 * For each node t_j the boundary level solves
 *
 *   e^{-c(T-t_j)} p(t_j, T-t_j) E[(Z^theta_{T-t_j} - 1)^+]
 *     + dt * sum_{i>j} e^{-c(t_i-t_j)} p(t_j, t_i-t_j)
 *                      E[H(t_i, Z^theta_{t_i-t_j}) 1{Z > b(t_i)}] = 0,
 *
 * with H(t, z) = mu(t)(z - 1)^+ + f(t). The expectations are closed form.
 *
 * The lag-dt term can read its boundary level either from the previous iterate,
 * b(t_{j+1}), or from the candidate theta itself (NearLag). Close to maturity
 * the boundary climbs to 1 like a square root, so b(t_{j+1}) - b(t_j) becomes
 * comparable to sigma sqrt(dt); the lag-dt exceedance probability then collapses
 * and the node equation at t_{n-1} has no root near the boundary. Reading theta
 * there keeps that probability near 1/2, as it is for the omitted lags in (0, dt).
 * Both choices converge to the same boundary as n grows.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "va/contract.hpp"
#include "va/lognormal.hpp"
#include "va/mortality.hpp"
#include "va/numerics.hpp"
#include "va/parallel.hpp"

namespace va {

/// Uniform partition t_j = j T / n of [0, T].
struct TimeGrid {
    int n = 200;
    double T = 10.0;

    TimeGrid() = default;
    TimeGrid(int n_, double T_) : n(n_), T(T_) {
        if (n < 2) throw std::invalid_argument("TimeGrid: need at least two steps");
        if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
    }
    [[nodiscard]] double dt() const noexcept { return T / n; }
    [[nodiscard]] double t(int j) const noexcept { return j == n ? T : T * j / n; }
};

struct Boundary {
    TimeGrid grid;
    std::vector<double> values;  ///< b(t_j), j = 0..n
    double t_star = 0.0;
    double lambda_cap = 0.0;
    int iterations = 0;
    double final_sup_change = 0.0;
    std::vector<double> change_history;

    [[nodiscard]] double beta(int j) const { return std::exp(lambda_cap * grid.t(j)) * values.at(j); }

    /// lim_{t -> T-} b(t): 1 when the surrender region reaches maturity, 0 when it is empty.
    [[nodiscard]] double left_limit_at_maturity() const {
        return grid.n >= 1 && values[grid.n - 1] > 0.0 ? values.back() : 0.0;
    }

    /// Linear interpolation between nodes.
    [[nodiscard]] double at(double t) const {
        if (t <= 0.0) return values.front();
        if (t >= grid.T) return values.back();
        const double x = t / grid.dt();
        const int j = std::min(static_cast<int>(x), grid.n - 1);
        const double w = x - j;
        return (1.0 - w) * values[j] + w * values[j + 1];
    }
};

/// Thrown when the sweep budget is exhausted. Carries the last iterate.
class PicardDivergence : public std::runtime_error {
public:
    PicardDivergence(const std::string& what, Boundary last)
        : std::runtime_error(what), last_(std::move(last)) {}
    [[nodiscard]] const Boundary& last_iterate() const noexcept { return last_; }

private:
    Boundary last_;
};

/// Lambda >= 0 such that e^{Lambda t} b(t) is non-decreasing.
[[nodiscard]] inline double lambda_cap(const ContractSpec& spec, const MortalityModel& m) {
    const double lambda = aging_rate_bound(m, spec.T);
    const double c1 = lambda + max_force_of_mortality(m, spec.T);
    const double abs_alpha = std::abs(spec.alpha());
    const double c0 = abs_alpha * std::exp(abs_alpha * spec.T);
    return std::max(0.0, c1 + spec.c + c0 - f_function(spec, m, spec.T));
}

/// Boundary level used by the lag-dt term of the node equation.
enum class NearLag {
    PreviousIterate,  ///< b(t_{j+1}) from the current iterate: the plain right-point sum
    OwnLevel,         ///< the candidate level theta
};

/// Right-point Riemann residual at node j for candidate level theta, built
/// directly from kernel_integral. Reference version of the solver's inner loop.
[[nodiscard]] inline double residual(int j, double theta, const Boundary& current, const ContractSpec& spec,
                                     const MortalityModel& m, NearLag near = NearLag::OwnLevel) {
    const TimeGrid& g = current.grid;
    if (!(theta > 0.0)) throw std::invalid_argument("residual: theta must be positive");
    if (j < 0 || j >= g.n) throw std::out_of_range("residual: node index must be in [0, n)");
    const double tj = g.t(j);
    const double alpha = spec.alpha();
    const double tau = spec.T - tj;
    double res = std::exp(-spec.c * tau) * survival_probability(m, tj, tau) *
                 call_value(GbmLaw(theta, tau, alpha, spec.sigma));
    double sum = 0.0;
    for (int i = j + 1; i <= g.n; ++i) {
        const double ti = g.t(i);
        const double s = ti - tj;
        const double level = i == j + 1 && near == NearLag::OwnLevel ? theta : current.values[i];
        sum += std::exp(-spec.c * s) * survival_probability(m, tj, s) *
               kernel_integral(GbmLaw(theta, s, alpha, spec.sigma), level, force_of_mortality(m, ti),
                               f_function(spec, m, ti));
    }
    return res + g.dt() * sum;
}

namespace detail {

/// Precomputed tables for fast residual evaluation on a fixed grid.
class ResidualTable {
public:
    ResidualTable(const ContractSpec& spec, const MortalityModel& m, const TimeGrid& grid)
        : n_(grid.n), dt_(grid.dt()), sigma_(spec.sigma), alpha_(spec.alpha()) {
        mu_.resize(n_ + 1);
        f_.resize(n_ + 1);
        h_.resize(n_ + 1);
        for (int i = 0; i <= n_; ++i) {
            const double t = grid.t(i);
            mu_[i] = force_of_mortality(m, t);
            f_[i] = f_function(spec, m, t);
            h_[i] = mu_[i] > 0.0 ? std::max(0.0, 1.0 - f_[i] / mu_[i]) : kInf;
        }
        // Lag-only quantities (uniform grid).
        sd_.resize(n_ + 1);
        drift_lo_.resize(n_ + 1);
        drift_hi_.resize(n_ + 1);
        growth_.resize(n_ + 1);
        for (int k = 1; k <= n_; ++k) {
            const double s = k * dt_;
            sd_[k] = sigma_ * std::sqrt(s);
            drift_lo_[k] = (alpha_ - 0.5 * sigma_ * sigma_) * s;
            drift_hi_[k] = (alpha_ + 0.5 * sigma_ * sigma_) * s;
            growth_[k] = std::exp(alpha_ * s);
        }
        weight_.assign(static_cast<std::size_t>(n_ + 1) * (n_ + 1), 0.0);
        for (int j = 0; j <= n_; ++j) {
            const double tj = grid.t(j);
            for (int i = j + 1; i <= n_; ++i) {
                const double s = grid.t(i) - tj;
                weight_[idx(j, i)] = std::exp(-spec.c * s) * survival_probability(m, tj, s);
            }
        }
    }

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] double h(int j) const { return h_[j]; }

    /// Logs of the current iterate, reused across every root-find in a sweep.
    struct Prepared {
        std::vector<double> log_b;    ///< -inf where b = 0
        std::vector<double> log_max;  ///< log(max(b, 1))
        std::vector<bool> zero;
    };

    [[nodiscard]] Prepared prepare(const std::vector<double>& b) const {
        Prepared p;
        p.log_b.resize(n_ + 1);
        p.log_max.resize(n_ + 1);
        p.zero.resize(n_ + 1);
        for (int i = 0; i <= n_; ++i) {
            p.zero[i] = !(b[i] > 0.0);
            p.log_b[i] = p.zero[i] ? -kInf : std::log(b[i]);
            p.log_max[i] = std::max(0.0, p.zero[i] ? 0.0 : p.log_b[i]);
        }
        return p;
    }

    void update(Prepared& p, int i, double b) const {
        p.zero[i] = !(b > 0.0);
        p.log_b[i] = p.zero[i] ? -kInf : std::log(b);
        p.log_max[i] = std::max(0.0, p.zero[i] ? 0.0 : p.log_b[i]);
    }

    [[nodiscard]] double operator()(int j, double theta, const Prepared& p, NearLag near) const {
        const double lt = std::log(theta);
        const int lag_T = n_ - j;
        // Terminal call term: (Z - 1)^+ at maturity.
        double terminal = theta * growth_[lag_T] * normal_cdf((lt + drift_hi_[lag_T]) / sd_[lag_T]) -
                          normal_cdf((lt + drift_lo_[lag_T]) / sd_[lag_T]);
        terminal = std::max(0.0, terminal) * weight_[idx(j, n_)];
        double sum = 0.0;
        for (int i = j + 1; i <= n_; ++i) {
            const int k = i - j;
            const double sd = sd_[k];
            const bool self = i == j + 1 && near == NearLag::OwnLevel;
            const double lm = self ? std::max(0.0, lt) : p.log_max[i];
            const double call_part = theta * growth_[k] * normal_cdf((lt - lm + drift_hi_[k]) / sd) -
                                     normal_cdf((lt - lm + drift_lo_[k]) / sd);
            const double tail_b = self ? normal_cdf(drift_lo_[k] / sd)
                                       : p.zero[i] ? 1.0 : normal_cdf((lt - p.log_b[i] + drift_lo_[k]) / sd);
            sum += weight_[idx(j, i)] * (mu_[i] * call_part + f_[i] * tail_b);
        }
        return terminal + dt_ * sum;
    }

private:
    [[nodiscard]] std::size_t idx(int j, int i) const noexcept {
        return static_cast<std::size_t>(j) * (n_ + 1) + static_cast<std::size_t>(i);
    }

    int n_;
    double dt_;
    double sigma_;
    double alpha_;
    std::vector<double> mu_, f_, h_;
    std::vector<double> sd_, drift_lo_, drift_hi_, growth_;
    std::vector<double> weight_;
};

}  // namespace detail

enum class SweepOrder {
    /// Every node is solved against the previous iterate.
    Jacobi,
    /// Nodes are solved from maturity backwards, each against the freshest values.
    BackwardGaussSeidel,
};

struct PicardOptions {
    int max_sweeps = 500;
    int min_polish_sweeps = 2;
    double polish_factor = 0.01;
    double theta_floor = 1e-10;
    int bisection_iterations = 64;
    double bisection_width = 1e-10;
    SweepOrder order = SweepOrder::Jacobi;
    NearLag near_lag = NearLag::OwnLevel;
};

/// Picard iteration for the surrender boundary, initialised at
/// b0(t) = (1 + (t/T)^2) / 2. After the sup-norm change drops below eps the
/// sweeps continue until it drops below eps * polish_factor, with at least
/// min_polish_sweeps extra sweeps.
[[nodiscard]] inline Boundary picard_solve(const ContractSpec& spec, const MortalityModel& m, const TimeGrid& grid,
                                           double eps = 1e-2, const PicardOptions& opt = {}) {
    spec.validate();
    if (!(eps > 0.0)) throw std::invalid_argument("picard_solve: eps must be positive");
    if (std::abs(grid.T - spec.T) > 1e-12) throw std::invalid_argument("picard_solve: grid horizon differs from T");

    const detail::ResidualTable table(spec, m, grid);
    const int n = grid.n;

    Boundary out;
    out.grid = grid;
    out.t_star = t_star(spec, m);
    out.lambda_cap = lambda_cap(spec, m);
    out.values.resize(n + 1);
    for (int j = 0; j <= n; ++j) {
        const double x = grid.t(j) / grid.T;
        out.values[j] = 0.5 * (1.0 + x * x);
    }

    // Root of the node equation in (0, h(t_j)]. Nodes before t* lie outside the
    // support of any admissible boundary. From t* on every later driver value is
    // negative, so the residual is negative near zero and only the upper end of
    // the bracket needs a sign test.
    auto solve_node = [&](int j, const detail::ResidualTable::Prepared& prepared) {
        if (grid.t(j) < out.t_star) return 0.0;
        const double hi = table.h(j);
        if (!(hi > opt.theta_floor)) return 0.0;
        if (table(j, hi, prepared, opt.near_lag) <= 0.0) return hi;
        return bisect_predicate([&](double th) { return table(j, th, prepared, opt.near_lag) > 0.0; },
                                opt.theta_floor, hi,
                                opt.bisection_iterations, opt.bisection_width);
    };

    // Highest index whose value changed in the last sweep; nodes at or above it
    // see identical inputs and are copied instead of re-solved.
    int dirty_top = n;
    std::vector<double> prev_values = out.values;

    auto jacobi_sweep = [&](const std::vector<double>& prev) {
        std::vector<double> next = prev_values;
        next[n] = 1.0;
        const auto prepared = table.prepare(prev);
        const int limit = std::min(dirty_top, n);
        parallel_for(static_cast<std::size_t>(limit),
                     [&](std::size_t jj) { next[jj] = solve_node(static_cast<int>(jj), prepared); });
        return next;
    };

    auto seidel_sweep = [&](const std::vector<double>& prev) {
        std::vector<double> next = prev;
        next[n] = 1.0;
        auto prepared = table.prepare(next);
        for (int j = n - 1; j >= 0; --j) {
            next[j] = solve_node(j, prepared);
            table.update(prepared, j, next[j]);
        }
        return next;
    };

    auto sup_change = [](const std::vector<double>& a, const std::vector<double>& b) {
        double d = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
        return d;
    };

    bool converged = false;
    int polish_done = 0;
    for (int k = 0; k < opt.max_sweeps; ++k) {
        auto next = opt.order == SweepOrder::Jacobi ? jacobi_sweep(out.values) : seidel_sweep(out.values);
        const double d = sup_change(next, out.values);
        dirty_top = 0;
        for (int i = n; i >= 0; --i) {
            if (next[i] != out.values[i]) {
                dirty_top = i;
                break;
            }
        }
        prev_values = next;
        out.values = std::move(next);
        out.iterations = k + 1;
        out.final_sup_change = d;
        out.change_history.push_back(d);
        if (!converged) {
            converged = d < eps;
            continue;
        }
        ++polish_done;
        if (polish_done >= opt.min_polish_sweeps && d < eps * opt.polish_factor) return out;
    }
    throw PicardDivergence("picard_solve: no convergence within " + std::to_string(opt.max_sweeps) + " sweeps",
                           out);
}

/// Residual of node j evaluated against the boundary itself.
[[nodiscard]] inline double self_residual(int j, const Boundary& b, const ContractSpec& spec,
                                          const MortalityModel& m, NearLag near = NearLag::OwnLevel) {
    return residual(j, b.values.at(j), b, spec, m, near);
}

struct SurrenderPoint {
    double t;
    double level;  ///< account value at which surrender is optimal, +inf if never
};

/// l(t_j) = x0 e^{g t_j} / b(t_j), +inf where b vanishes.
[[nodiscard]] inline std::vector<SurrenderPoint> surrender_curve(const Boundary& b, const ContractSpec& spec) {
    std::vector<SurrenderPoint> out;
    out.reserve(b.values.size());
    for (int j = 0; j <= b.grid.n; ++j) {
        const double t = b.grid.t(j);
        const double v = b.values[j];
        out.push_back({t, v > 0.0 ? spec.x0 * std::exp(spec.g * t) / v : kInf});
    }
    return out;
}

}  // namespace va
