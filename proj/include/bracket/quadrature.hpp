#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "bracket/error.hpp"

namespace bracket::quadrature {

// Nodes and weights on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t order() const { return nodes.size(); }
};

// Newton iteration on P_n starting from the Tricomi approximation of each root.
inline GaussLegendreRule make_gauss_legendre(std::size_t n) {
    detail::require(n >= 1, "Gauss-Legendre order must be >= 1");
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    if (n == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = 2.0;
        return rule;
    }
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Store ascending and mirror so the rule is exactly symmetric.
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

// Process-wide cache; rules are immutable once built.
inline std::shared_ptr<const GaussLegendreRule> gauss_legendre(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, std::shared_ptr<const GaussLegendreRule>> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto rule = std::make_shared<const GaussLegendreRule>(make_gauss_legendre(n));
    cache.emplace(n, rule);
    return rule;
}

inline constexpr std::size_t kMinOrder = 32;
inline constexpr std::size_t kMaxOrder = 8192;
inline constexpr double kRelTol = 1e-10;

// Starting order for an arc of width gamma when the integrand's exponent scales
// like `scale` (the largest field amplitude involved).
inline std::size_t initial_order(double gamma, double scale) {
    const double want = 4.0 * gamma * std::max(scale, 0.0);
    std::size_t n = kMinOrder;
    if (want > static_cast<double>(n)) {
        n = std::bit_ceil(static_cast<std::size_t>(std::ceil(std::min(want, double(kMaxOrder)))));
    }
    return std::min(n, kMaxOrder);
}

// Mean of f over psi uniform on [-gamma/2, gamma/2] with a fixed rule.
template <class F>
double arc_mean(const GaussLegendreRule& rule, double gamma, F&& f) {
    const double h = 0.5 * gamma;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.order(); ++i) acc += rule.weights[i] * f(h * rule.nodes[i]);
    return 0.5 * acc;
}

inline double relative_change(double prev, double next) {
    const double scale = std::max(std::abs(prev), std::abs(next));
    if (scale == 0.0) return 0.0;
    return std::abs(next - prev) / scale;
}

inline double relative_change(const std::vector<double>& prev, const std::vector<double>& next) {
    double scale = 0.0;
    double diff = 0.0;
    const std::size_t n = std::max(prev.size(), next.size());
    for (std::size_t i = 0; i < n; ++i) {
        const double a = i < prev.size() ? prev[i] : 0.0;
        const double b = i < next.size() ? next[i] : 0.0;
        scale = std::max({scale, std::abs(a), std::abs(b)});
        diff = std::max(diff, std::abs(a - b));
    }
    return scale == 0.0 ? 0.0 : diff / scale;
}

template <class T>
struct AdaptiveResult {
    T value;
    std::size_t order;
};

// Doubles the order of `evaluate(rule)` from initial_order(gamma, scale) until two
// successive results agree to kRelTol (max-norm relative for vectors).
template <class Evaluate>
auto adaptive_arc(double gamma, double scale, Evaluate&& evaluate)
    -> AdaptiveResult<decltype(evaluate(std::declval<const GaussLegendreRule&>()))> {
    std::size_t n = initial_order(gamma, scale);
    auto prev = evaluate(*gauss_legendre(n));
    while (n < kMaxOrder) {
        n *= 2;
        auto next = evaluate(*gauss_legendre(n));
        if (relative_change(prev, next) < kRelTol) return {std::move(next), n};
        prev = std::move(next);
    }
    return {std::move(prev), n};
}

}  // namespace bracket::quadrature
