/**
 * @file mc_oracle.hpp
 * @brief Independent checks on the solver: Monte Carlo estimates of the
 *        stopped reward under both measures, and a Bermudan dynamic-programming
 *        oracle on a grid in log inverse moneyness.
 *
 * Random numbers come from a counter-based generator keyed by (seed, path, step),
 * so results do not depend on how paths are split across threads.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "va/boundary_solver.hpp"
#include "va/contract.hpp"
#include "va/mortality.hpp"
#include "va/numerics.hpp"
#include "va/parallel.hpp"

namespace va {

struct McConfig {
    std::size_t n_paths = 100000;
    int n_steps = 200;
    std::uint64_t seed = 20240601;
    bool antithetic = true;
    unsigned threads = 0;  ///< 0: worker_count()

    void validate() const {
        if (n_paths < 2) throw std::invalid_argument("McConfig: n_paths must be at least 2");
        if (n_steps < 1) throw std::invalid_argument("McConfig: n_steps must be at least 1");
        if (antithetic && n_paths % 2 != 0) throw std::invalid_argument("McConfig: antithetic needs an even n_paths");
    }
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
};

namespace detail {

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Uniform in (0, 1) from the top 53 bits.
[[nodiscard]] inline double to_unit(std::uint64_t x) noexcept {
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal draw for (seed, stream, step) by Box-Muller on two hashed uniforms.
[[nodiscard]] inline double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) noexcept {
    const std::uint64_t key = splitmix64(seed ^ splitmix64(stream ^ splitmix64(step)));
    const double u1 = to_unit(key);
    const double u2 = to_unit(splitmix64(key));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Innovation for a path: antithetic partners (2k, 2k+1) use the same draw with opposite sign.
[[nodiscard]] inline double path_normal(const McConfig& cfg, std::size_t path, int step) noexcept {
    if (!cfg.antithetic) return counter_normal(cfg.seed, path, static_cast<std::uint64_t>(step));
    const double xi = counter_normal(cfg.seed, path / 2, static_cast<std::uint64_t>(step));
    return path % 2 == 0 ? xi : -xi;
}

/// Mean and standard error; antithetic pairs are averaged first so the
/// error reflects independent samples.
[[nodiscard]] inline McEstimate summarise(const std::vector<double>& samples, const McConfig& cfg) {
    std::vector<double> units;
    if (cfg.antithetic) {
        units.reserve(samples.size() / 2);
        for (std::size_t i = 0; i + 1 < samples.size(); i += 2) units.push_back(0.5 * (samples[i] + samples[i + 1]));
    } else {
        units = samples;
    }
    const auto n = static_cast<double>(units.size());
    double mean = 0.0;
    for (double v : units) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : units) ss += (v - mean) * (v - mean);
    McEstimate est;
    est.mean = mean;
    est.std_error = units.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    est.n_paths = samples.size();
    est.seed = cfg.seed;
    return est;
}

inline unsigned threads_for(const McConfig& cfg) { return cfg.threads == 0 ? worker_count() : cfg.threads; }

}  // namespace detail

/// Row-major n_paths x (n_steps + 1) matrix of simulated levels.
struct PathMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;
    [[nodiscard]] double operator()(std::size_t p, std::size_t k) const { return data[p * cols + k]; }
};

/// Exact log-normal paths of dZ = drift Z dt + sigma Z dW on [0, spec.T].
[[nodiscard]] inline PathMatrix simulate_gbm_paths(double z0, double drift, const ContractSpec& spec,
                                                   const McConfig& cfg) {
    if (!(z0 > 0.0)) throw std::invalid_argument("simulate_gbm_paths: z0 must be positive");
    cfg.validate();
    const double dt = spec.T / cfg.n_steps;
    const double step_drift = (drift - 0.5 * spec.sigma * spec.sigma) * dt;
    const double step_vol = spec.sigma * std::sqrt(dt);
    PathMatrix out;
    out.rows = cfg.n_paths;
    out.cols = static_cast<std::size_t>(cfg.n_steps) + 1;
    out.data.resize(out.rows * out.cols);
    parallel_for(
        cfg.n_paths,
        [&](std::size_t p) {
            double* row = out.data.data() + p * out.cols;
            row[0] = z0;
            double logz = std::log(z0);
            for (int k = 0; k < cfg.n_steps; ++k) {
                logz += step_drift + step_vol * detail::path_normal(cfg, p, k);
                row[k + 1] = std::exp(logz);
            }
        },
        detail::threads_for(cfg));
    return out;
}

/// Estimates w(0, 1): Z starts at 1 under the account numeraire and is stopped
/// at the first grid time with Z <= b(t). The running reward is integrated by
/// the trapezoid rule along the path; unstopped paths collect (Z_T - 1)^+.
[[nodiscard]] inline McEstimate mc_stopped_value(const Boundary& b, const ContractSpec& spec, const MortalityModel& m,
                                                 const McConfig& cfg) {
    cfg.validate();
    const int N = cfg.n_steps;
    const double dt = spec.T / N;
    const double alpha = spec.alpha();
    const double step_drift = (alpha - 0.5 * spec.sigma * spec.sigma) * dt;
    const double step_vol = spec.sigma * std::sqrt(dt);
    std::vector<double> disc(N + 1), mu(N + 1), f(N + 1), level(N + 1);
    for (int k = 0; k <= N; ++k) {
        const double t = k == N ? spec.T : spec.T * k / N;
        disc[k] = std::exp(-spec.c * t) * survival_probability(m, 0.0, t);
        mu[k] = force_of_mortality(m, t);
        f[k] = f_function(spec, m, t);
        level[k] = b.at(t);
    }
    std::vector<double> samples(cfg.n_paths);
    parallel_for(
        cfg.n_paths,
        [&](std::size_t p) {
            double z = 1.0;
            double logz = 0.0;
            double prev = disc[0] * (f[0] + mu[0] * std::max(z - 1.0, 0.0));
            if (z <= level[0]) {
                samples[p] = 0.0;
                return;
            }
            double acc = 0.0;
            for (int k = 1; k <= N; ++k) {
                logz += step_drift + step_vol * detail::path_normal(cfg, p, k - 1);
                z = std::exp(logz);
                const double cur = disc[k] * (f[k] + mu[k] * std::max(z - 1.0, 0.0));
                acc += 0.5 * dt * (prev + cur);
                prev = cur;
                if (k < N && z <= level[k]) {
                    samples[p] = acc;
                    return;
                }
            }
            samples[p] = acc + disc[N] * std::max(z - 1.0, 0.0);
        },
        detail::threads_for(cfg));
    return detail::summarise(samples, cfg);
}

/// Estimates V0 under the pricing measure: X starts at x0 with drift r - c and
/// is surrendered at the first grid time with X >= l(t) = x0 e^{gt} / b(t).
/// Mortality is integrated out, leaving a death-benefit running term.
[[nodiscard]] inline McEstimate mc_value_Q(const Boundary& b, const ContractSpec& spec, const MortalityModel& m,
                                           const McConfig& cfg) {
    cfg.validate();
    const int N = cfg.n_steps;
    const double dt = spec.T / N;
    const double step_drift = (spec.r - spec.c - 0.5 * spec.sigma * spec.sigma) * dt;
    const double step_vol = spec.sigma * std::sqrt(dt);
    std::vector<double> disc(N + 1), mu(N + 1), guarantee(N + 1), keep(N + 1), ell(N + 1);
    for (int k = 0; k <= N; ++k) {
        const double t = k == N ? spec.T : spec.T * k / N;
        disc[k] = std::exp(-spec.r * t) * survival_probability(m, 0.0, t);
        mu[k] = force_of_mortality(m, t);
        guarantee[k] = spec.x0 * std::exp(spec.g * t);
        keep[k] = 1.0 - penalty(spec, t);
        const double bt = b.at(t);
        ell[k] = bt > 0.0 ? guarantee[k] / bt : kInf;
    }
    std::vector<double> samples(cfg.n_paths);
    parallel_for(
        cfg.n_paths,
        [&](std::size_t p) {
            double x = spec.x0;
            if (x >= ell[0]) {
                samples[p] = keep[0] * x;
                return;
            }
            double logx = std::log(x);
            double prev = disc[0] * mu[0] * std::max(guarantee[0], x);
            double acc = 0.0;
            for (int k = 1; k <= N; ++k) {
                logx += step_drift + step_vol * detail::path_normal(cfg, p, k - 1);
                x = std::exp(logx);
                const double cur = disc[k] * mu[k] * std::max(guarantee[k], x);
                acc += 0.5 * dt * (prev + cur);
                prev = cur;
                if (k < N && x >= ell[k]) {
                    samples[p] = acc + disc[k] * keep[k] * x;
                    return;
                }
            }
            samples[p] = acc + disc[N] * std::max(guarantee[N], x);
        },
        detail::threads_for(cfg));
    return detail::summarise(samples, cfg);
}

/// Gauss-Hermite rule for weight e^{-x^2}: nodes and weights by Newton
/// iteration on the orthonormal Hermite recurrence.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussHermite(int n) : nodes(n), weights(n) {
        if (n < 2) throw std::invalid_argument("GaussHermite: need at least two nodes");
        const double pim4 = std::pow(std::numbers::pi, -0.25);
        const int half = (n + 1) / 2;
        double z = 0.0;
        for (int i = 0; i < half; ++i) {
            if (i == 0) z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
            else if (i == 1) z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
            else if (i == 2) z = 1.86 * z - 0.86 * nodes[0];
            else if (i == 3) z = 1.91 * z - 0.91 * nodes[1];
            else z = 2.0 * z - nodes[i - 2];
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p1 = pim4;
                double p2 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
                }
                pp = std::sqrt(2.0 * n) * p2;
                const double z1 = z;
                z = z1 - p1 / pp;
                if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
    }

    /// E[g(xi)] for xi standard normal.
    template <class F>
    [[nodiscard]] double expect_normal(F&& g) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * g(std::numbers::sqrt2 * nodes[i]);
        return sum * std::numbers::inv_sqrtpi;
    }
};

struct DpOptions {
    int gh_nodes = 32;
    double width_sigmas = 6.0;  ///< half-width of the ln z grid in units of sigma sqrt(T)
    bool exercise = true;
    int exercise_every = 1;  ///< surrender only at steps j with j % exercise_every == 0
};

struct DpResult {
    double w01 = 0.0;
    std::vector<double> times;     ///< t_j, j = 0..n_time
    std::vector<double> boundary;  ///< exercise level per step; b(T) = 1
    std::vector<double> log_z;     ///< spatial grid
    std::vector<double> w0;        ///< w(0, e^{y}) on the spatial grid
};

/// Values w_{j+1}, given on a uniform log grid, extended outside the grid:
/// flat below, linear in z above.
class LogGridFunction {
public:
    LogGridFunction(const std::vector<double>& y, const std::vector<double>& v)
        : spline_(y, v), y_lo_(y.front()), y_hi_(y.back()), v_lo_(v.front()), v_hi_(v.back()) {
        slope_z_ = spline_.derivative(y_hi_) / std::exp(y_hi_);
    }
    [[nodiscard]] double operator()(double y) const {
        if (y <= y_lo_) return v_lo_;
        if (y >= y_hi_) return v_hi_ + slope_z_ * (std::exp(y) - std::exp(y_hi_));
        return spline_(y);
    }

private:
    CubicSpline spline_;
    double y_lo_, y_hi_, v_lo_, v_hi_, slope_z_;
};

/// One backward step: the continuation value at time t on every grid node,
///   dt H(t, z) + e^{-c dt} p(t, dt) E[w_next(Z_dt^z)],
/// before the max with zero.
[[nodiscard]] inline std::vector<double> dp_continuation(const std::vector<double>& log_z,
                                                         const std::vector<double>& w_next, double t, double dt,
                                                         const ContractSpec& spec, const MortalityModel& m,
                                                         const GaussHermite& gh) {
    const LogGridFunction next(log_z, w_next);
    const double mu = force_of_mortality(m, t);
    const double f = f_function(spec, m, t);
    const double disc = std::exp(-spec.c * dt) * survival_probability(m, t, dt);
    const double shift = (spec.alpha() - 0.5 * spec.sigma * spec.sigma) * dt;
    const double vol = spec.sigma * std::sqrt(dt);
    std::vector<double> out(log_z.size());
    for (std::size_t i = 0; i < log_z.size(); ++i) {
        const double y = log_z[i];
        const double expect = gh.expect_normal([&](double xi) { return next(y + shift + vol * xi); });
        out[i] = dt * (mu * std::max(std::exp(y) - 1.0, 0.0) + f) + disc * expect;
    }
    return out;
}

/// Bermudan approximation of w by backward induction on n_time steps and
/// n_space log-levels. The exercise level at each step is the largest z where
/// the continuation value is not positive, located by linear interpolation.
[[nodiscard]] inline DpResult bermudan_dp_oracle(const ContractSpec& spec, const MortalityModel& m, int n_time,
                                                 int n_space, const DpOptions& opt = {}) {
    if (n_time < 50) throw std::invalid_argument("bermudan_dp_oracle: n_time must be at least 50");
    if (n_space < 200) throw std::invalid_argument("bermudan_dp_oracle: n_space must be at least 200");
    if (opt.width_sigmas < 6.0) throw std::invalid_argument("bermudan_dp_oracle: grid narrower than +-6 sigma");
    if (opt.exercise_every < 1) throw std::invalid_argument("bermudan_dp_oracle: exercise_every must be positive");
    if (!(spec.sigma > 0.0)) throw std::invalid_argument("bermudan_dp_oracle: sigma must be positive");

    const double half = opt.width_sigmas * spec.sigma * std::sqrt(spec.T);
    const double centre = (spec.alpha() - 0.5 * spec.sigma * spec.sigma) * spec.T;
    const double y_lo = std::min(0.0, centre) - half;
    const double y_hi = std::max(0.0, centre) + half;

    DpResult res;
    res.log_z.resize(n_space + 1);
    for (int i = 0; i <= n_space; ++i) res.log_z[i] = y_lo + (y_hi - y_lo) * i / n_space;
    res.times.resize(n_time + 1);
    for (int j = 0; j <= n_time; ++j) res.times[j] = j == n_time ? spec.T : spec.T * j / n_time;
    res.boundary.assign(n_time + 1, 0.0);
    res.boundary[n_time] = 1.0;

    const GaussHermite gh(opt.gh_nodes);
    const double dt = spec.T / n_time;
    std::vector<double> w(n_space + 1);
    for (int i = 0; i <= n_space; ++i) w[i] = std::max(std::exp(res.log_z[i]) - 1.0, 0.0);

    for (int j = n_time - 1; j >= 0; --j) {
        std::vector<double> cont = dp_continuation(res.log_z, w, res.times[j], dt, spec, m, gh);
        const bool can_stop = opt.exercise && j % opt.exercise_every == 0;
        if (can_stop) {
            int top = -1;
            for (int i = n_space; i >= 0; --i) {
                if (cont[i] <= 0.0) {
                    top = i;
                    break;
                }
            }
            if (top >= 0) {
                double level = std::exp(res.log_z[top]);
                if (top < n_space) {
                    const double a = cont[top];
                    const double c = cont[top + 1];
                    const double frac = a == c ? 0.0 : -a / (c - a);
                    level = std::exp(res.log_z[top]) + frac * (std::exp(res.log_z[top + 1]) - std::exp(res.log_z[top]));
                }
                res.boundary[j] = level;
            }
            for (double& v : cont) v = std::max(v, 0.0);
        }
        w = std::move(cont);
    }
    res.w0 = w;
    res.w01 = LogGridFunction(res.log_z, w)(0.0);
    return res;
}

}  // namespace va
