#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "cone_domain.hpp"
#include "error.hpp"
#include "quadrature.hpp"
#include "radial.hpp"

namespace conemt {

struct Rearrangement {
    RadialProfile profile;   // u*(rho), rho about the log-origin
    GridFunction grid;       // sorted values assigned to nodes by distance rank
};

namespace detail {

inline void require_nonnegative(const GridFunction& u, const char* where)
{
    for (double v : u.values()) {
        if (!std::isfinite(v)) throw NumericError(std::string(where) + ": non-finite value");
        if (v < 0.0) throw PreconditionError(std::string(where) + ": input must be nonnegative (pass |u|)");
    }
}

}  // namespace detail

// Symmetric decreasing rearrangement with respect to dr dy about the log-origin.
// Node k of the descending sort occupies the annulus of measure w_k that follows the
// previous ones; the profile point sits at the radius enclosing half of that annulus.
inline Rearrangement rearrange(const GridFunction& u)
{
    const LogGrid& g = u.grid();
    if (g.domain().kind != DomainKind::full_cone)
        throw PreconditionError("rearrange: centred log-balls only fit the full cone");
    detail::require_nonnegative(u, "rearrange");
    const std::size_t n = g.size();

    std::vector<std::size_t> by_value(n);
    std::iota(by_value.begin(), by_value.end(), std::size_t{0});
    std::stable_sort(by_value.begin(), by_value.end(),
                     [&](std::size_t a, std::size_t b) { return u[a] > u[b]; });

    std::vector<double> rho, val;
    double mass = 0.0;
    for (std::size_t k : by_value) {
        if (u[k] <= 0.0) break;
        const double w = g.weight(k / g.ny(), k % g.ny());
        rho.push_back(std::sqrt((mass + 0.5 * w) / std::numbers::pi));
        val.push_back(u[k]);
        mass += w;
    }
    rho.push_back(std::sqrt(mass / std::numbers::pi));
    val.push_back(0.0);

    std::vector<double> dist2(n);
    for (std::size_t i = 0; i < g.nr(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j) dist2[g.index(i, j)] = g.r(i) * g.r(i) + g.y(j) * g.y(j);
    std::vector<std::size_t> by_dist(n);
    std::iota(by_dist.begin(), by_dist.end(), std::size_t{0});
    std::stable_sort(by_dist.begin(), by_dist.end(),
                     [&](std::size_t a, std::size_t b) { return dist2[a] < dist2[b]; });

    GridFunction out(g);
    for (std::size_t k = 0; k < n; ++k) out[by_dist[k]] = u[by_value[k]];
    return {RadialProfile(RadialVariable::rho, std::move(rho), std::move(val)), std::move(out)};
}

struct PolyaSzegoTerms {
    double energy = 0.0;       // |grad u_h|^2 of the P1 interpolant
    double energy_star = 0.0;  // |grad (u_h)*|^2 of its continuum rearrangement
    double gap() const { return energy - energy_star; }
};

// P1 interpolant on the right-triangle split of each cell along (i,j)-(i+1,j+1).
// Its Dirichlet energy equals the five-point form. For the rearrangement,
//   |grad u*|^2 = int_0^max 4 pi mu(t) / |mu'(t)| dt
// with mu(t) = |{u_h > t}| piecewise quadratic between vertex values; each interval
// between consecutive vertex values is integrated by Gauss-Legendre.
inline PolyaSzegoTerms polya_szego_terms(const GridFunction& u, std::size_t gauss_points = 6)
{
    detail::require_nonnegative(u, "polya_szego_gap");
    const LogGrid& g = u.grid();
    const double hr = g.hr(), hy = g.hy(), S = 0.5 * hr * hy;

    struct Tri {
        double a, b, c;
    };
    std::vector<Tri> tris;
    PolyaSzegoTerms out;
    auto add = [&](double p, double q, double r) {
        double v[3] = {p, q, r};
        std::sort(v, v + 3);
        if (v[2] > 0.0) tris.push_back({v[0], v[1], v[2]});
    };
    for (std::size_t i = 0; i + 1 < g.nr(); ++i)
        for (std::size_t j = 0; j + 1 < g.ny(); ++j) {
            const double u00 = u.at(i, j), u10 = u.at(i + 1, j), u01 = u.at(i, j + 1), u11 = u.at(i + 1, j + 1);
            // right angle at (i+1, j) and at (i, j+1)
            const double a1 = (u10 - u00) / hr, b1 = (u11 - u10) / hy;
            const double a2 = (u11 - u01) / hr, b2 = (u01 - u00) / hy;
            out.energy += S * (a1 * a1 + b1 * b1 + a2 * a2 + b2 * b2);
            add(u00, u10, u11);
            add(u00, u01, u11);
        }
    if (tris.empty()) return out;

    std::vector<double> levels{0.0};
    for (const Tri& t : tris) {
        for (double x : {t.a, t.b, t.c})
            if (x > 0.0) levels.push_back(x);
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    std::sort(tris.begin(), tris.end(), [](const Tri& x, const Tri& y) { return x.a < y.a; });
    const double total_area = S * static_cast<double>(tris.size());
    const GaussRule& rule = gauss_legendre(gauss_points);

    std::vector<Tri> active;
    std::size_t next = 0;
    double added_area = 0.0;
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
        const double lo = levels[k], hi = levels[k + 1];
        while (next < tris.size() && tris[next].a <= lo) {
            active.push_back(tris[next]);
            added_area += S;
            ++next;
        }
        active.erase(std::remove_if(active.begin(), active.end(), [&](const Tri& t) { return t.c <= lo; }),
                     active.end());
        if (active.empty()) continue;
        const double above = total_area - added_area;
        out.energy_star += gauss_integrate(
            [&](double t) {
                double mu = above, dmu = 0.0;
                for (const Tri& T : active) {
                    if (t < T.b) {
                        const double den = (T.b - T.a) * (T.c - T.a);
                        mu += S * (1.0 - (t - T.a) * (t - T.a) / den);
                        dmu -= 2.0 * S * (t - T.a) / den;
                    } else {
                        const double den = (T.c - T.a) * (T.c - T.b);
                        mu += S * (T.c - t) * (T.c - t) / den;
                        dmu -= 2.0 * S * (T.c - t) / den;
                    }
                }
                return 4.0 * std::numbers::pi * mu / -dmu;
            },
            lo, hi, rule);
    }
    return out;
}

inline double polya_szego_gap(const GridFunction& u) { return polya_szego_terms(u).gap(); }

struct ReduceOptions {
    std::size_t n = 20001;   // t nodes
    double t_max = 0.0;      // 0 picks 2 ln(R / first rho node), at least 1
};

// w(t) = sqrt(2 omega_1) u*(R e^{-t/2}) on a uniform t-grid, omega_1 = 2 pi.
inline RadialProfile reduce_to_1d(const RadialProfile& p, double R, ReduceOptions opt = {})
{
    if (p.variable() != RadialVariable::rho) throw PreconditionError("reduce_to_1d: needs a rho profile");
    if (!(R > 0.0)) throw DomainError("reduce_to_1d: R must be positive");
    if (p.support() > R * (1.0 + 1e-12))
        throw PreconditionError("reduce_to_1d: profile support exceeds R = " + fmt(R));
    if (opt.n < 2) throw DomainError("reduce_to_1d: need at least two t nodes");
    double T = opt.t_max;
    if (T <= 0.0) {
        const double first = p.grid().front() > 0.0 ? p.grid().front() : (p.size() > 1 ? p.grid()[1] : R);
        T = std::max(1.0, 2.0 * std::log(R / std::min(first, R)));
    }
    const double c = std::sqrt(4.0 * std::numbers::pi);
    std::vector<double> t(opt.n), w(opt.n);
    for (std::size_t k = 0; k < opt.n; ++k) {
        t[k] = k + 1 == opt.n ? T : T * static_cast<double>(k) / static_cast<double>(opt.n - 1);
        w[k] = c * p(R * std::exp(-0.5 * t[k]));
    }
    // u* is nonincreasing, so w is nondecreasing up to rounding of the interpolation
    for (std::size_t k = 1; k < opt.n; ++k) w[k] = std::max(w[k], w[k - 1]);
    return RadialProfile(RadialVariable::moser_t, std::move(t), std::move(w));
}

}  // namespace conemt
