/**
 * @file numerics.hpp
 * @brief Small numerical kernels shared across the engine: normal CDF,
 *        Simpson/trapezoid rules, bisection and a natural cubic spline.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace va {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Standard normal CDF through erfc, accurate in both tails.
[[nodiscard]] inline double normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x * (0.5 * std::numbers::sqrt2));
}

[[nodiscard]] inline double normal_pdf(double x) noexcept {
    return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

/// Composite Simpson rule on [a, b] with an even number of panels whose width
/// does not exceed max_step.
template <class F>
[[nodiscard]] double simpson(F&& f, double a, double b, double max_step) {
    if (!(b > a)) return 0.0;
    auto panels = static_cast<std::size_t>(std::ceil((b - a) / max_step));
    panels = std::max<std::size_t>(2, panels + (panels % 2));
    const double h = (b - a) / static_cast<double>(panels);
    double odd = 0.0;
    double even = 0.0;
    for (std::size_t i = 1; i < panels; ++i) {
        const double v = f(a + h * static_cast<double>(i));
        (i % 2 ? odd : even) += v;
    }
    return h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b));
}

/// Trapezoid rule over equally spaced samples.
[[nodiscard]] inline double trapezoid(std::span<const double> values, double step) {
    if (values.size() < 2) return 0.0;
    double sum = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
    return sum * step;
}

/// Bisection for a predicate that is false on the left and true on the right
/// of the crossing. Returns the midpoint of the final bracket.
template <class Pred>
[[nodiscard]] double bisect_predicate(Pred&& is_right, double lo, double hi,
                                      int max_iter = 64, double width = 1e-10) {
    for (int it = 0; it < max_iter && hi - lo >= width; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (is_right(mid)) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

/// Natural cubic spline through strictly increasing abscissae.
class CubicSpline {
public:
    CubicSpline() = default;

    CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n) {
            throw std::invalid_argument("CubicSpline: need at least two matching nodes");
        }
        for (std::size_t i = 1; i < n; ++i) {
            if (!(x_[i] > x_[i - 1])) {
                throw std::invalid_argument("CubicSpline: abscissae must be strictly increasing");
            }
        }
        m_.assign(n, 0.0);
        if (n == 2) return;
        // Thomas algorithm on the interior second-derivative system.
        std::vector<double> c(n, 0.0), d(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x_[i] - x_[i - 1];
            const double h1 = x_[i + 1] - x_[i];
            const double a = h0;
            const double b = 2.0 * (h0 + h1);
            const double cc = h1;
            const double rhs = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
            const double denom = b - a * c[i - 1];
            c[i] = cc / denom;
            d[i] = (rhs - a * d[i - 1]) / denom;
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m_[i] = d[i] - c[i] * m_[i + 1];
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return x_.size(); }
    [[nodiscard]] double x_min() const noexcept { return x_.front(); }
    [[nodiscard]] double x_max() const noexcept { return x_.back(); }

    [[nodiscard]] double operator()(double t) const { return eval(t, 0); }
    [[nodiscard]] double derivative(double t) const { return eval(t, 1); }
    [[nodiscard]] double second_derivative(double t) const { return eval(t, 2); }

private:
    [[nodiscard]] double eval(double t, int order) const {
        const std::size_t i = segment(t);
        const double h = x_[i + 1] - x_[i];
        const double a = (x_[i + 1] - t) / h;
        const double b = (t - x_[i]) / h;
        switch (order) {
        case 0:
            return a * y_[i] + b * y_[i + 1] +
                   ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
        case 1:
            return (y_[i + 1] - y_[i]) / h +
                   (-(3.0 * a * a - 1.0) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
        default:
            return a * m_[i] + b * m_[i + 1];
        }
    }

    [[nodiscard]] std::size_t segment(double t) const {
        if (t <= x_.front()) return 0;
        if (t >= x_.back()) return x_.size() - 2;
        const auto it = std::upper_bound(x_.begin(), x_.end(), t);
        return static_cast<std::size_t>(it - x_.begin()) - 1;
    }

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;
};

}  // namespace va
