#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "error.hpp"

namespace conemt {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

namespace detail {

// P_n(x) and P_n'(x) by the three-term recurrence.
inline std::pair<double, double> legendre(std::size_t n, double x)
{
    double p0 = 1.0, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
    }
    double dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

}  // namespace detail

// Newton iteration on P_n from the Chebyshev guesses.
inline GaussRule make_gauss_legendre(std::size_t n)
{
    if (n == 0) throw DomainError("gauss_legendre: n must be positive");
    GaussRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    if (n == 1) {
        rule.weights[0] = 2.0;
        return rule;
    }
    for (std::size_t i = 0; i < n / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        for (int it = 0; it < 100; ++it) {
            auto [p, dp] = detail::legendre(n, x);
            double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double dp = detail::legendre(n, x).second;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) {
        double dp = detail::legendre(n, 0.0).second;
        rule.weights[n / 2] = 2.0 / (dp * dp);
    }
    return rule;
}

// Cached rules; the cache is shared across threads.
inline const GaussRule& gauss_legendre(std::size_t n)
{
    static std::map<std::size_t, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
    return it->second;
}

template <class F>
double gauss_integrate(F&& f, double a, double b, const GaussRule& rule)
{
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q)
        s += rule.weights[q] * f(mid + half * rule.nodes[q]);
    return half * s;
}

// Recursive bisection comparing an n-point rule with its 2n-point sibling.
template <class F>
double adaptive_integrate(F&& f, double a, double b, double rel_tol = 1e-14,
                          std::size_t order = 10, int max_depth = 48)
{
    const GaussRule& lo = gauss_legendre(order);
    const GaussRule& hi = gauss_legendre(2 * order);
    std::function<double(double, double, double, int)> rec =
        [&](double x0, double x1, double scale, int depth) -> double {
        double coarse = gauss_integrate(f, x0, x1, lo);
        double fine = gauss_integrate(f, x0, x1, hi);
        double ref = std::max(std::abs(scale), std::abs(fine));
        if (std::abs(fine - coarse) <= rel_tol * ref || depth >= max_depth)
            return fine;
        double xm = 0.5 * (x0 + x1);
        return rec(x0, xm, scale, depth + 1) + rec(xm, x1, scale, depth + 1);
    };
    double scale = gauss_integrate(f, a, b, hi);
    return rec(a, b, scale, 0);
}

}  // namespace conemt
