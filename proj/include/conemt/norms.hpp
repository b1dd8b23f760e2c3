#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "cone_domain.hpp"
#include "error.hpp"

namespace conemt {

// Weighted norm parameters for base dimension n = 1.
struct NormSpec {
    double p = 2.0;
    double gamma = 1.0;
    int order = 0;  // m in {0, 1}

    void validate() const
    {
        if (!(p >= 1.0)) throw DomainError("NormSpec: p must be >= 1");
        if (order != 0 && order != 1) throw DomainError("NormSpec: order must be 0 or 1");
    }
};

// A_alpha(s) = e^{alpha s^2} - 1
struct NFunction {
    double alpha = 4.0 * 3.14159265358979323846;

    double operator()(double s) const
    {
        double e = alpha * s * s;
        if (e > exp_guard) throw RangeError("N-function exponent exceeds the overflow guard");
        return std::expm1(e);
    }
};

namespace detail {

// t^{n+1} |t^{-gamma} u|^p dt/t in log coordinates: e^{-(2 - gamma p) r} |u|^p dr dy
inline double weighted_power_integral(const GridFunction& u, double p, double gamma)
{
    const LogGrid& g = u.grid();
    const double a = 2.0 - gamma * p;
    double s = 0.0;
    for (std::size_t i = 0; i < g.nr(); ++i) {
        const double w = std::exp(-a * g.r(i));
        for (std::size_t j = 0; j < g.ny(); ++j) {
            double v = u.at(i, j);
            if (!std::isfinite(v)) throw NumericError("norm: non-finite grid value");
            s += g.weight(i, j) * w * std::pow(std::abs(v), p);
        }
    }
    return s;
}

}  // namespace detail

inline double lp_gamma_norm(const GridFunction& u, const NormSpec& spec)
{
    spec.validate();
    if (spec.order != 0) throw PreconditionError("lp_gamma_norm: NormSpec.order must be 0");
    return std::pow(detail::weighted_power_integral(u, spec.p, spec.gamma), 1.0 / spec.p);
}

// |grad_B u| in L_p^gamma, with |.| the Euclidean length of (x1 d_x1 u, d_x2 u)
inline double gradient_seminorm(const GridFunction& u, const NormSpec& spec,
                                DiffOrder order = DiffOrder::second)
{
    spec.validate();
    auto [gr, gy] = cone_gradient(u, order);
    for (std::size_t k = 0; k < gr.size(); ++k) gr[k] = std::hypot(gr[k], gy[k]);
    return std::pow(detail::weighted_power_integral(gr, spec.p, spec.gamma), 1.0 / spec.p);
}

// ||grad_B u||_2 with respect to dx1/x1 dx2
inline double dirichlet_seminorm(const GridFunction& u, DiffOrder order = DiffOrder::second)
{
    return gradient_seminorm(u, NormSpec{2.0, 1.0, 1}, order);
}

inline double h1_norm(const GridFunction& u, const NormSpec& spec, DiffOrder order = DiffOrder::second)
{
    spec.validate();
    if (spec.order != 1) throw PreconditionError("h1_norm: NormSpec.order must be 1");
    auto [gr, gy] = cone_gradient(u, order);
    double s = detail::weighted_power_integral(u, spec.p, spec.gamma) +
               detail::weighted_power_integral(gr, spec.p, spec.gamma) +
               detail::weighted_power_integral(gy, spec.p, spec.gamma);
    return std::pow(s, 1.0 / spec.p);
}

// inf{lambda > 0 : int A(|u|/lambda) dmu <= 1}, found by bisection on
// G(lambda) = int A(|u|/lambda) dmu - 1. An overflowing G counts as +infinity.
inline double luxemburg_norm(const GridFunction& u, const std::function<double(double)>& A,
                             double initial_upper)
{
    const LogGrid& g = u.grid();
    u.check_finite("luxemburg_norm");
    const double umax = u.max_abs();
    if (umax == 0.0) return 0.0;

    auto G = [&](double lambda) {
        double s = 0.0;
        try {
            for (std::size_t i = 0; i < g.nr(); ++i)
                for (std::size_t j = 0; j < g.ny(); ++j) {
                    double v = u.at(i, j);
                    if (v != 0.0) s += g.weight(i, j) * A(std::abs(v) / lambda);
                }
        } catch (const RangeError&) {
            return std::numeric_limits<double>::infinity();
        }
        return s - 1.0;
    };

    double lo = 1e-8, hi = initial_upper;
    double ghi = G(hi);
    for (int k = 0; ghi > 0.0; ++k) {
        if (k > 200) throw RangeError("luxemburg_norm: could not bracket the root");
        lo = hi;
        hi *= 2.0;
        ghi = G(hi);
    }
    for (int k = 0; G(lo) <= 0.0; ++k) {
        if (k > 2000) throw RangeError("luxemburg_norm: could not bracket the root");
        hi = lo;
        lo *= 0.5;
    }
    double mid = hi;
    for (int it = 0; it < 400; ++it) {
        mid = 0.5 * (lo + hi);
        double gm = G(mid);
        if (std::abs(gm) <= 1e-10) break;
        if (gm > 0.0) lo = mid; else hi = mid;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    }
    double gm = G(mid);
    if (!std::isfinite(gm)) throw RangeError("luxemburg_norm: exponent exceeds the overflow guard at the root");
    return mid;
}

inline double luxemburg_norm(const GridFunction& u, const NFunction& A)
{
    if (!(A.alpha > 0.0)) throw DomainError("NFunction: alpha must be positive");
    const double upper = u.max_abs() * std::sqrt(A.alpha / std::log(2.0)) * 10.0;
    return luxemburg_norm(u, std::function<double(double)>(A), upper);
}

}  // namespace conemt
