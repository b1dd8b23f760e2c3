#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "cone_domain.hpp"
#include "error.hpp"
#include "norms.hpp"
#include "quadrature.hpp"
#include "radial.hpp"

namespace conemt {

inline constexpr double omega1 = 2.0 * std::numbers::pi;  // perimeter of the unit circle
inline constexpr double alpha2 = 2.0 * omega1;           // sharp exponent 4 pi

struct MTParams {
    double alpha = alpha2;
    double beta = 1.0;  // alpha / alpha2
    double p = 2.0;
    double q = 2.0;     // 1/p + 1/q = 1

    static MTParams from_alpha(double alpha, double p = 2.0)
    {
        if (!(alpha > 0.0)) throw DomainError("MTParams: alpha must be positive");
        if (!(p > 1.0)) throw DomainError("MTParams: p must exceed 1");
        MTParams m{alpha, alpha / alpha2, p, p / (p - 1.0)};
        if (m.q < 2.0) throw DomainError("MTParams: q = p/(p-1) must be at least 2");
        return m;
    }
};

namespace detail {

inline double guarded_expm1(double e, const char* where)
{
    if (e > exp_guard) throw RangeError(std::string(where) + ": exponent exceeds the overflow guard");
    return std::expm1(e);
}

}  // namespace detail

// int (e^{alpha (u/lambda)^2} - 1) dmu on the grid
inline double mt_integral(const GridFunction& u, double alpha, double lambda)
{
    if (!(lambda > 0.0)) throw DomainError("mt_integral: lambda must be positive");
    const LogGrid& g = u.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < g.nr(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j) {
            const double v = u.at(i, j) / lambda;
            if (!std::isfinite(v)) throw NumericError("mt_integral: non-finite value");
            if (v != 0.0) s += g.weight(i, j) * detail::guarded_expm1(alpha * v * v, "mt_integral");
        }
    return s;
}

inline double mt_functional(const GridFunction& u, double alpha, DiffOrder order = DiffOrder::second)
{
    const double lambda = dirichlet_seminorm(u, order);
    if (lambda == 0.0) throw PreconditionError("mt_functional: u has zero Dirichlet energy");
    return mt_integral(u, alpha, lambda);
}

inline double mt_ratio(const GridFunction& u, double alpha, DiffOrder order = DiffOrder::second)
{
    const double grad2 = std::pow(dirichlet_seminorm(u, order), 2);
    const double l2 = std::pow(lp_gamma_norm(u, {2.0, 1.0, 0}), 2);
    if (l2 == 0.0 || grad2 == 0.0) throw PreconditionError("mt_ratio: u must be nonzero");
    return mt_integral(u, alpha, std::sqrt(grad2)) / (l2 / grad2);
}

// Radial versions with exact piecewise quadrature of the Dirichlet energy.
inline double mt_integral(const RadialFunction& f, double alpha, double lambda)
{
    return radial_integral(f, [&](double rho) {
        const double v = f.value(rho) / lambda;
        return detail::guarded_expm1(alpha * v * v, "mt_integral");
    });
}

inline double mt_functional(const RadialFunction& f, double alpha)
{
    return mt_integral(f, alpha, std::sqrt(dirichlet_energy(f)));
}

inline double mt_ratio(const RadialFunction& f, double alpha)
{
    const double grad2 = dirichlet_energy(f);
    return mt_integral(f, alpha, std::sqrt(grad2)) / (l2_squared(f) / grad2);
}

// sum (dw/dt)^q dt of the piecewise-linear profile
inline double admissibility_integral(const RadialProfile& w, double q)
{
    const auto& t = w.grid();
    const auto& v = w.values();
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        const double dt = t[k + 1] - t[k];
        s += std::pow(std::abs(v[k + 1] - v[k]) / dt, q) * dt;
    }
    return s;
}

struct OneDOptions {
    bool check_admissible = true;  // off only for envelope profiles such as t^{1/p}
    std::size_t gauss_points = 8;
};

// int_0^inf e^{beta w^p - t} dt: Gauss-Legendre per cell of the linear interpolant,
// plus the exact tail e^{beta w_end^p - T} for the constant continuation.
inline double one_d_functional(const RadialProfile& w, double beta, double p, OneDOptions opt = {})
{
    if (w.variable() != RadialVariable::moser_t) throw PreconditionError("one_d_functional: needs a moser_t profile");
    if (!(p > 1.0)) throw DomainError("one_d_functional: p must exceed 1");
    const auto& t = w.grid();
    const auto& v = w.values();
    if (t.front() != 0.0) throw PreconditionError("one_d_functional: the t-grid must start at 0");
    if (opt.check_admissible) {
        if (std::abs(v.front()) > 1e-12) throw PreconditionError("one_d_functional: w(0) must vanish");
        const double q = p / (p - 1.0);
        const double a = admissibility_integral(w, q);
        if (a > 1.0 + 1e-9)
            throw PreconditionError("one_d_functional: int (dw/dt)^q dt = " + fmt(a) + " exceeds 1");
    }
    auto expo = [&](double wt, double tt) {
        const double e = beta * std::pow(wt, p);
        if (e > exp_guard) throw RangeError("one_d_functional: exponent exceeds the overflow guard");
        return std::exp(e - tt);
    };
    const GaussRule& rule = gauss_legendre(opt.gauss_points);
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        const double a = t[k], b = t[k + 1];
        s += gauss_integrate(
            [&](double x) { return expo(v[k] + (x - a) / (b - a) * (v[k + 1] - v[k]), x); }, a, b, rule);
    }
    return s + expo(v.back(), t.back());
}

// w = t1^{1/p} min(t/t1, 1); the grid stops at t1 and the plateau is the constant tail.
inline RadialProfile blowup_profile(double t1, double p, std::size_t cells = 0)
{
    if (!(t1 > 0.0)) throw DomainError("blowup_profile: t1 must be positive");
    if (cells == 0) cells = std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(t1 / 0.02)));
    const double top = std::pow(t1, 1.0 / p);
    std::vector<double> t(cells + 1), w(cells + 1);
    for (std::size_t k = 0; k <= cells; ++k) {
        t[k] = k == cells ? t1 : t1 * static_cast<double>(k) / static_cast<double>(cells);
        w[k] = k == cells ? top : top * t[k] / t1;
    }
    return RadialProfile(RadialVariable::moser_t, std::move(t), std::move(w));
}

// w = t^{1/p} on a grid graded towards 0; not admissible (int dw^q diverges), it is the
// envelope that saturates the subcritical bound 1/(1 - beta).
inline RadialProfile root_profile(double p, double t_end = 80.0, std::size_t n = 20001)
{
    std::vector<double> t(n), w(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double x = static_cast<double>(k) / static_cast<double>(n - 1);
        t[k] = t_end * x * x;
        w[k] = std::pow(t[k], 1.0 / p);
    }
    return RadialProfile(RadialVariable::moser_t, std::move(t), std::move(w));
}

// u_k = sqrt(k / 2 omega_1) on rho <= e^{-k/2}, -2 ln rho / sqrt(2 omega_1 k) up to rho = 1, 0 beyond.
inline RadialFunction moser_sequence(double k)
{
    if (!(k > 0.0)) throw DomainError("moser_sequence: k must be positive");
    const double c = 1.0 / std::sqrt(2.0 * omega1);
    const double core = std::exp(-0.5 * k);
    RadialFunction f;
    f.value = [=](double rho) {
        if (rho <= core) return c * std::sqrt(k);
        if (rho <= 1.0) return -2.0 * std::log(rho) * c / std::sqrt(k);
        return 0.0;
    };
    f.slope = [=](double rho) {
        if (rho <= core || rho > 1.0) return 0.0;
        return -2.0 * c / (std::sqrt(k) * rho);
    };
    f.breakpoints = {0.0, core, 1.0};
    return f;
}

inline GridFunction moser_sequence(const LogGrid& g, double k) { return sample_radial(moser_sequence(k), g); }

// M2(rho) = omega_1^{-1/2} {sqrt(ln 2) on rho <= d/2; ln(d/rho)/sqrt(ln 2) on d/2 <= rho <= d; 0 beyond}
inline RadialFunction moser_function(double d)
{
    if (!(d > 0.0)) throw DomainError("moser_function: d must be positive");
    const double c = 1.0 / std::sqrt(omega1), l2 = std::log(2.0);
    RadialFunction f;
    f.value = [=](double rho) {
        if (rho <= 0.5 * d) return c * std::sqrt(l2);
        if (rho <= d) return c * std::log(d / rho) / std::sqrt(l2);
        return 0.0;
    };
    f.slope = [=](double rho) {
        if (rho <= 0.5 * d || rho > d) return 0.0;
        return -c / (rho * std::sqrt(l2));
    };
    f.breakpoints = {0.0, 0.5 * d, d};
    return f;
}

inline GridFunction moser_function_2d(const LogGrid& g, double d, double cr = 0.0, double cy = 0.0)
{
    return sample_radial(moser_function(d), g, cr, cy);
}

// u_r(x1, x2) = u(x1^r, r x2): the dilation (s, y) -> (r s, r y) in log coordinates.
inline GridFunction scale_map(const GridFunction& u, double r)
{
    if (!(r > 0.0)) throw DomainError("scale_map: r must be positive");
    if (r == 1.0) return u;
    const LogGrid& g = u.grid();
    const ConeDomain& d = g.domain();
    for (std::size_t i = 0; i < g.nr(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j) {
            if (u.at(i, j) == 0.0) continue;
            const double a = g.r(i) / r, b = g.y(j) / r;
            if (a < d.r_lo() || a > d.r_hi() || b < d.y_lo() || b > d.y_hi())
                throw SupportOverflow("scale_map: rescaled support leaves the grid box");
        }
    GridFunction out = GridFunction::sample(g, [&](double a, double b) { return interpolate(u, r * a, r * b); });
    if (u.dirichlet()) out.enforce_dirichlet();
    return out;
}

// n int_0^1 e^{n(t^2 - t)} dt = 2n int_0^{1/2} e^{-n t (1 - t)} dt, adaptive on dyadic panels
// accumulating towards the endpoint layer of width 1/n.
inline double f5_constant(double n, std::size_t order = 10)
{
    if (!(n >= 1.0)) throw DomainError("f5_constant: n must be at least 1");
    auto f = [n](double t) { return std::exp(-n * t * (1.0 - t)); };
    std::vector<double> cuts{0.0};
    for (double c = 1.0 / n; c < 0.5; c *= 2.0) cuts.push_back(c);
    cuts.push_back(0.5);
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) s += adaptive_integrate(f, cuts[k], cuts[k + 1], 1e-15, order);
    return 2.0 * n * s;
}

}  // namespace conemt
