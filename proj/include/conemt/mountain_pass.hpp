#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <json.hpp>

#include "cone_domain.hpp"
#include "cone_operator.hpp"
#include "error.hpp"
#include "io.hpp"
#include "mt_lab.hpp"
#include "nonlinearity.hpp"

namespace conemt {

namespace detail {

inline std::vector<double> forcing_values(const LogGrid& g, const NonlinearitySpec& spec)
{
    std::vector<double> out;
    if (!spec.forcing) return out;
    out.assign(g.size(), 0.0);
    for (std::size_t i = 1; i + 1 < g.nr(); ++i)
        for (std::size_t j = 1; j + 1 < g.ny(); ++j) out[g.index(i, j)] = spec.forcing(g.r(i), g.y(j));
    return out;
}

}  // namespace detail

// hr hy sum over interior nodes of F(x, u)
inline double potential(const DiscreteOperator& A, const NonlinearitySpec& spec, const GridFunction& u)
{
    A.require(u, "potential");
    const LogGrid& g = A.grid();
    const std::vector<double> gx = detail::forcing_values(g, spec);
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < g.nr(); ++i)
        for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
            const std::size_t k = g.index(i, j);
            s += spec.F(u[k]);
            if (!gx.empty()) s += gx[k] * u[k];
        }
    return s * g.hr() * g.hy();
}

// I(u) = 1/2 <A u, u>_h - int F(x, u) dmu
inline double energy(const DiscreteOperator& A, const NonlinearitySpec& spec, const GridFunction& u)
{
    return 0.5 * A.energy(u) - potential(A, spec, u);
}

// nodal residual A u - f(x, u); <gradient(u), v>_h is the derivative of I along v
inline GridFunction gradient(const DiscreteOperator& A, const NonlinearitySpec& spec, const GridFunction& u)
{
    GridFunction G = A.apply(u);
    const LogGrid& g = A.grid();
    const std::vector<double> gx = detail::forcing_values(g, spec);
    for (std::size_t i = 1; i + 1 < g.nr(); ++i)
        for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
            const std::size_t k = g.index(i, j);
            G[k] -= spec.f(u[k]) + (gx.empty() ? 0.0 : gx[k]);
        }
    return G;
}

inline double energy_norm(const DiscreteOperator& A, const GridFunction& u) { return std::sqrt(A.energy(u)); }

struct ConditionReport {
    double lambda1 = 0.0;
    double f4_value = 0.0;      // max of 2F(t)/t^2 over |t| in {1e-3 .. 1e-6}
    bool f4_pass = false;
    bool f3_pass = false;       // theta = 1: ft - 2F nondecreasing along rays
    bool f2_pass = false;       // F(t)/t^2 increasing across doublings
    std::string growth_class;   // "subcritical" or "critical"
    double alpha_estimate = 0.0;
    bool f5_applicable = false;
    double f5_lhs = 0.0;        // f(t) t e^{-alpha0 t^2} at t = 30
    double f5_rhs = 0.0;        // (2/d)^2 / (M alpha0)
    bool f5_pass = false;
    std::string f6_note = "(f6) is a sequential compactness property and is not checked numerically";

    bool geometry_pass() const { return f2_pass && f3_pass && f4_pass; }

    nlohmann::json to_json() const
    {
        return {{"lambda1", lambda1},         {"f2_pass", f2_pass},
                {"f3_pass", f3_pass},         {"f4_value", f4_value},
                {"f4_pass", f4_pass},         {"growth_class", growth_class},
                {"alpha_estimate", alpha_estimate}, {"f5_applicable", f5_applicable},
                {"f5_lhs", f5_lhs},           {"f5_rhs", f5_rhs},
                {"f5_pass", f5_pass},         {"f6_note", f6_note}};
    }
};

// Spot checks of the growth conditions on the autonomous part of f; d is the inner radius.
inline ConditionReport validate_conditions(const NonlinearitySpec& spec, double lambda1, double d = 1.0)
{
    ConditionReport rep;
    rep.lambda1 = lambda1;
    for (double t : {1e-3, 1e-4, 1e-5, 1e-6})
        for (double sg : {1.0, -1.0}) rep.f4_value = std::max(rep.f4_value, 2.0 * spec.F(sg * t) / (t * t));
    rep.f4_pass = rep.f4_value < lambda1;

    auto calF = [&](double t) { return spec.f(t) * t - 2.0 * spec.F(t); };
    rep.f3_pass = true;
    for (int a = 1; a <= 40; ++a) {
        const double t = 0.1 * a;
        for (double sg : {1.0, -1.0}) {
            const double top = calF(sg * t);
            for (int b = 0; b < 20; ++b) {
                const double s = 0.05 * b;
                if (calF(sg * s * t) > top * (1.0 + 1e-12) + 1e-300) rep.f3_pass = false;
            }
        }
    }

    rep.f2_pass = spec.family != Family::zero;
    double prev = 0.0;
    for (double t : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        double q;
        try {
            q = spec.F(t) / (t * t);
        } catch (const RangeError&) {
            break;  // already beyond any quadratic
        }
        if (!(q > prev)) rep.f2_pass = false;
        prev = q;
    }

    // slope of ln f against t^2 over [10, 20] and [20, 30]
    if (spec.family == Family::zero) {
        rep.growth_class = "subcritical";
    } else {
        const double s1 = (spec.log_f(20.0) - spec.log_f(10.0)) / 300.0;
        const double s2 = (spec.log_f(30.0) - spec.log_f(20.0)) / 500.0;
        rep.alpha_estimate = s2;
        rep.growth_class = (s2 > 1e-3 && std::abs(s2 / s1 - 1.0) < 0.05) ? "critical" : "subcritical";
    }

    if (spec.family == Family::critical_exp) {
        rep.f5_applicable = true;
        auto lhs = [&](double t) { return std::exp(spec.log_f(t) + std::log(t) - spec.alpha0 * t * t); };
        rep.f5_lhs = lhs(30.0);
        rep.f5_rhs = (2.0 / d) * (2.0 / d) / (f5_constant(1e4) * spec.alpha0);
        rep.f5_pass = lhs(10.0) <= lhs(20.0) && lhs(20.0) <= lhs(30.0) && rep.f5_lhs >= rep.f5_rhs;
    }
    return rep;
}

// Smooth random Dirichlet direction: half-sine modes up to 4 x 4 with N(0,1)/(a b) weights.
inline GridFunction random_direction(const LogGrid& g, std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    const ConeDomain& d = g.domain();
    const double Lr = d.r_hi() - d.r_lo(), Ly = d.y_hi() - d.y_lo();
    double coef[4][4];
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) coef[a][b] = n(rng) / ((a + 1) * (b + 1));
    return GridFunction::sample(
        g,
        [&](double r, double y) {
            double s = 0.0;
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    s += coef[a][b] * std::sin(std::numbers::pi * (a + 1) * (r - d.r_lo()) / Lr) *
                         std::sin(std::numbers::pi * (b + 1) * (y - d.y_lo()) / Ly);
            return s;
        },
        true);
}

struct GeometryReport {
    double rho = 0.0;    // energy-norm radius of the sampled sphere
    double delta = 0.0;  // min of I over the sampled sphere
    std::size_t directions = 0;
};

// I >= delta > 0 on the sphere |u|_A = rho, sampled along `count` random directions; rho
// is halved from 1 until the minimum is positive.
inline GeometryReport check_geometry(const DiscreteOperator& A, const NonlinearitySpec& spec, std::uint64_t seed = 1,
                                     std::size_t count = 50)
{
    std::mt19937_64 rng(seed);
    std::vector<GridFunction> dirs;
    for (std::size_t k = 0; k < count; ++k) {
        GridFunction v = random_direction(A.grid(), rng);
        v *= 1.0 / energy_norm(A, v);
        dirs.push_back(std::move(v));
    }
    GeometryReport rep;
    rep.directions = count;
    for (double rho = 1.0; rho > 1e-9; rho *= 0.5) {
        double m = std::numeric_limits<double>::infinity();
        try {
            for (const auto& v : dirs) m = std::min(m, energy(A, spec, rho * v));
        } catch (const RangeError&) {
            continue;
        }
        if (m > 0.0) {
            rep.rho = rho;
            rep.delta = m;
            return rep;
        }
    }
    return rep;
}

struct Endpoint {
    GridFunction e;
    double t = 0.0;
    double energy = 0.0;
    std::size_t doublings = 0;
};

// Doubles t until I(t direction) <= -1. An overflow brackets the crossing, which is then
// located by bisection.
inline Endpoint find_endpoint(const DiscreteOperator& A, const NonlinearitySpec& spec, const GridFunction& direction)
{
    if (direction.max_abs() == 0.0) throw PreconditionError("find_endpoint: direction vanishes");
    for (double v : direction.values())
        if (v < -1e-14 * direction.max_abs()) throw PreconditionError("find_endpoint: direction must be nonnegative");
    auto I = [&](double t) { return energy(A, spec, t * direction); };
    double t = 1.0;
    for (std::size_t n = 0; n <= 60; ++n, t *= 2.0) {
        double e;
        try {
            e = I(t);
        } catch (const RangeError&) {
            double lo = t / 2.0, hi = t;
            for (int k = 0; k < 200; ++k) {
                const double mid = 0.5 * (lo + hi);
                try {
                    const double em = I(mid);
                    if (em <= -1.0) return {mid * direction, mid, em, n};
                    lo = mid;
                } catch (const RangeError&) {
                    hi = mid;
                }
            }
            throw SolverError("find_endpoint: overflow before I dropped below -1 at t = " + fmt(lo));
        }
        if (e <= -1.0) return {t * direction, t, e, n};
    }
    throw SolverError("find_endpoint: I(t u) > -1 after 60 doublings; F is not superquadratic");
}

struct MPOptions {
    std::size_t path_points = 21;
    double tol = 1e-6;               // energy-norm gradient at the path maximum
    std::size_t max_iter = 20000;
    double armijo_shrink = 0.5;
    double armijo_slope = 1e-4;
    std::size_t max_halvings = 30;
    double cg_tol = 1e-10;
    double segment_tol = 1e-10;      // location of a segment maximum, in the segment parameter
    std::uint64_t seed = 1;          // geometry directions
    std::string dump_path;           // path CSV written on stagnation when non-empty
};

struct MPRecord {
    std::size_t iteration = 0;
    double path_max = 0.0;
    double grad_norm = 0.0;
    double step = 0.0;
    std::size_t index = 0;   // path segment holding the maximum
};

struct MPResult {
    GridFunction u_star;
    double level = 0.0;
    double grad_norm = 0.0;
    std::size_t iterations = 0;
    std::size_t cg_iterations = 0;
    double lambda1 = 0.0;
    double endpoint_t = 0.0;
    double endpoint_energy = 0.0;   // I(e) <= -1
    GeometryReport geometry;
    std::vector<MPRecord> history;
    std::vector<double> path_arclength;  // final path, energy-norm arc length at each node
    std::vector<double> path_energy;

    double norm_squared(const DiscreteOperator& A) const { return A.energy(u_star); }

    nlohmann::json to_json(const DiscreteOperator& A, const NonlinearitySpec& spec) const
    {
        double mn = 0.0, mx = 0.0;
        for (double v : u_star.values()) {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        return {{"spec", spec.name()},
                {"level", level},
                {"grad_norm", grad_norm},
                {"iterations", iterations},
                {"cg_iterations", cg_iterations},
                {"lambda1", lambda1},
                {"endpoint_t", endpoint_t},
                {"endpoint_energy", endpoint_energy},
                {"energy_norm_squared", norm_squared(A)},
                {"potential", potential(A, spec, u_star)},
                {"max", mx},
                {"min", mn},
                {"geometry", {{"rho", geometry.rho}, {"delta", geometry.delta}, {"directions", geometry.directions}}}};
    }

    void write_history_csv(const std::string& path) const
    {
        CsvWriter w({"iteration", "path_max", "grad_norm", "step", "index"});
        for (const auto& h : history)
            w.row({fmt(static_cast<double>(h.iteration)), fmt(h.path_max), fmt(h.grad_norm), fmt(h.step),
                   fmt(static_cast<double>(h.index))});
        w.save(path);
    }

    void write_path_csv(const std::string& path) const
    {
        CsvWriter w({"node", "arclength", "energy"});
        for (std::size_t k = 0; k < path_energy.size(); ++k)
            w.row({static_cast<double>(k), path_arclength[k], path_energy[k]});
        w.save(path);
    }
};

namespace detail {

// Piecewise-linear path with cached node energies.
struct MPPath {
    std::vector<GridFunction> nodes;
    std::vector<double> energies;
};

struct PathMax {
    std::size_t segment = 0;   // maximum lies on nodes[segment] + tau (nodes[segment + 1] - nodes[segment])
    double tau = 0.0;
    GridFunction point;
    double value = -std::numeric_limits<double>::infinity();
};

// hr hy sum over interior nodes of (f(x, u) v)
inline double potential_slope(const DiscreteOperator& A, const NonlinearitySpec& spec, const std::vector<double>& gx,
                              const GridFunction& u, const GridFunction& v)
{
    const LogGrid& g = A.grid();
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < g.nr(); ++i)
        for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
            const std::size_t k = g.index(i, j);
            s += (spec.f(u[k]) + (gx.empty() ? 0.0 : gx[k])) * v[k];
        }
    return s * g.hr() * g.hy();
}

// Maximum of I over the whole path. Along a segment I = Q - P with Q quadratic and P
// convex (f is nondecreasing), so Q minus the larger end tangent of P is an upper bound
// whose maximum sits at an end or at the tangent crossing. Segments whose bound cannot
// beat the current best are skipped; the rest are searched by safeguarded Newton on I'.
inline PathMax path_max(const DiscreteOperator& A, const NonlinearitySpec& spec, const MPPath& p, double tol)
{
    const std::size_t K = p.nodes.size();
    const std::vector<double> gx = forcing_values(A.grid(), spec);
    PathMax best;
    for (std::size_t k = 0; k < K; ++k)
        if (p.energies[k] > best.value) {
            best.value = p.energies[k];
            best.segment = k + 1 < K ? k : k - 1;
            best.tau = k + 1 < K ? 0.0 : 1.0;
        }

    struct Seg {
        double bound;
        std::size_t k;
        double aa, ad, dd;
        double d0, d1;  // phi'(0), phi'(1)
    };
    std::vector<Seg> segs;
    for (std::size_t k = 0; k + 1 < K; ++k) {
        const GridFunction& a = p.nodes[k];
        const GridFunction d = p.nodes[k + 1] - a;
        const GridFunction Aa = A.apply(a), Ad = A.apply(d);
        const double aa = A.inner(Aa, a), ad = A.inner(Aa, d), dd = A.inner(Ad, d);
        const double P0 = 0.5 * aa - p.energies[k];
        const double P1 = 0.5 * (aa + 2.0 * ad + dd) - p.energies[k + 1];
        const double s0 = potential_slope(A, spec, gx, a, d), s1 = potential_slope(A, spec, gx, p.nodes[k + 1], d);
        auto Q = [&](double t) { return 0.5 * (aa + 2.0 * t * ad + t * t * dd); };
        auto bound = [&](double t) { return Q(t) - std::max(P0 + s0 * t, P1 - s1 * (1.0 - t)); };
        double b = std::max(bound(0.0), bound(1.0));
        if (s1 > s0) {
            const double tc = (P1 - s1 - P0) / (s0 - s1);
            if (tc > 0.0 && tc < 1.0) b = std::max(b, bound(tc));
        }
        segs.push_back({b, k, aa, ad, dd, ad - s0, ad + dd - s1});
    }
    std::stable_sort(segs.begin(), segs.end(), [](const Seg& x, const Seg& y) { return x.bound > y.bound; });

    GridFunction work = p.nodes.front();
    for (const Seg& s : segs) {
        if (s.bound <= best.value) break;
        // interior maximum needs phi'(0) > 0 > phi'(1); otherwise the ends already count
        if (!(s.d0 > 0.0 && s.d1 < 0.0)) continue;
        const GridFunction& a = p.nodes[s.k];
        const GridFunction d = p.nodes[s.k + 1] - a;
        auto& w = work.values();
        // phi'(t) and phi''(t) in one pass
        auto slopes = [&](double t) {
            for (std::size_t q = 0; q < w.size(); ++q) w[q] = a[q] + t * d[q];
            double s1 = 0.0, s2 = 0.0;
            const LogGrid& g = A.grid();
            for (std::size_t i = 1; i + 1 < g.nr(); ++i)
                for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
                    const std::size_t q = g.index(i, j);
                    s1 += (spec.f(w[q]) + (gx.empty() ? 0.0 : gx[q])) * d[q];
                    s2 += spec.fprime(w[q]) * d[q] * d[q];
                }
            const double c = g.hr() * g.hy();
            return std::pair{s.ad + t * s.dd - c * s1, s.dd - c * s2};
        };
        // safeguarded Newton on phi' inside the bracket [lo, hi]
        double lo = 0.0, hi = 1.0, t = 0.5;
        for (int it = 0; it < 100 && hi - lo > tol; ++it) {
            auto [d1, d2] = slopes(t);
            if (d1 == 0.0) break;
            if (d1 > 0.0) lo = t; else hi = t;
            const double next = d2 < 0.0 ? t - d1 / d2 : 0.5 * (lo + hi);
            const double step = std::abs(next - t);
            t = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
            if (step < tol) break;
        }
        for (std::size_t q = 0; q < w.size(); ++q) w[q] = a[q] + t * d[q];
        const double ft = 0.5 * (s.aa + 2.0 * t * s.ad + t * t * s.dd) - potential(A, spec, work);
        if (ft > best.value) {
            best.value = ft;
            best.segment = s.k;
            best.tau = t;
        }
    }
    best.point = p.nodes[best.segment];
    if (best.tau > 0.0) best.point.axpy(best.tau, p.nodes[best.segment + 1] - p.nodes[best.segment]);
    return best;
}

// Path with w placed at the location of the maximum: it replaces an end node of the
// segment when the maximum sits on that node and is inserted otherwise. Returns the
// index of w.
inline std::size_t place(MPPath& p, const PathMax& top, GridFunction w, double Iw)
{
    const std::size_t K = p.nodes.size();
    std::size_t at;
    if (top.tau == 0.0 || top.tau == 1.0) {
        at = top.segment + (top.tau == 1.0 ? 1 : 0);
        at = std::clamp<std::size_t>(at, 1, K - 2);
        p.nodes[at] = std::move(w);
        p.energies[at] = Iw;
    } else {
        at = top.segment + 1;
        p.nodes.insert(p.nodes.begin() + static_cast<std::ptrdiff_t>(at), std::move(w));
        p.energies.insert(p.energies.begin() + static_cast<std::ptrdiff_t>(at), Iw);
    }
    return at;
}

// K nodes uniform in energy-norm arc length on either side of node `pin`, which keeps
// its state and moves to the index matching its arc-length position. New nodes lie on
// the old segments.
inline MPPath reparameterize(const DiscreteOperator& A, const NonlinearitySpec& spec, const MPPath& p, std::size_t pin,
                             std::size_t K)
{
    const std::size_t n = p.nodes.size();
    std::vector<double> s(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) s[k] = s[k - 1] + energy_norm(A, p.nodes[k] - p.nodes[k - 1]);
    const double L = s.back();
    std::size_t j = static_cast<std::size_t>(std::lround(s[pin] / L * static_cast<double>(K - 1)));
    j = std::clamp<std::size_t>(j, 1, K - 2);
    auto at = [&](double target) {
        std::size_t k = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), target) - s.begin());
        k = std::clamp<std::size_t>(k, 1, n - 1);
        const double len = s[k] - s[k - 1];
        const double tau = len > 0.0 ? std::clamp((target - s[k - 1]) / len, 0.0, 1.0) : 0.0;
        GridFunction out = p.nodes[k - 1];
        out.axpy(tau, p.nodes[k] - p.nodes[k - 1]);
        return out;
    };
    MPPath q;
    q.nodes.resize(K);
    q.energies.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        if (k == 0) {
            q.nodes[k] = p.nodes.front();
            q.energies[k] = p.energies.front();
        } else if (k == K - 1) {
            q.nodes[k] = p.nodes.back();
            q.energies[k] = p.energies.back();
        } else if (k == j) {
            q.nodes[k] = p.nodes[pin];
            q.energies[k] = p.energies[pin];
        } else {
            const double target = k < j ? s[pin] * static_cast<double>(k) / static_cast<double>(j)
                                        : s[pin] + (L - s[pin]) * static_cast<double>(k - j) /
                                                       static_cast<double>(K - 1 - j);
            q.nodes[k] = at(target);
            q.energies[k] = energy(A, spec, q.nodes[k]);
        }
    }
    return q;
}

inline void dump_path(const DiscreteOperator& A, const MPPath& p, const std::string& path)
{
    CsvWriter w({"node", "energy", "energy_norm"});
    for (std::size_t k = 0; k < p.nodes.size(); ++k)
        w.row({static_cast<double>(k), p.energies[k], energy_norm(A, p.nodes[k])});
    w.save(path);
}

}  // namespace detail

// Path-deformation mountain pass from 0 to e = t v_1 (v_1 the first eigenfunction).
// Each iteration moves the path maximum along the Riesz gradient. A step is accepted
// when it passes the Armijo test and the maximum of the deformed path does not exceed
// the old one. The path is then redistributed by arc length. If redistribution would
// raise the maximum, the extra node is kept instead.
inline MPResult mp_solve(const DiscreteOperator& A, const NonlinearitySpec& spec, MPOptions opt = {})
{
    if (opt.path_points < 3) throw DomainError("mp_solve: need at least three path points");
    if (!(opt.tol > 0.0)) throw DomainError("mp_solve: tol must be positive");
    MPResult res;
    const EigenResult eig = first_eigenvalue(A);
    res.lambda1 = eig.lambda1;
    const ConditionReport cond = validate_conditions(spec, eig.lambda1);
    if (!cond.geometry_pass()) throw PreconditionError("mp_solve: (f2)-(f4) spot checks fail for " + spec.name());
    res.geometry = check_geometry(A, spec, opt.seed);
    if (!(res.geometry.delta > 0.0)) throw PreconditionError("mp_solve: no sphere with I > 0 found");

    GridFunction dir = eig.eigenfunction;
    dir *= 1.0 / energy_norm(A, dir);
    for (double& v : dir.values()) v = std::max(v, 0.0);
    const Endpoint end = find_endpoint(A, spec, dir);
    res.endpoint_t = end.t;
    res.endpoint_energy = end.energy;
    if (!(end.t > res.geometry.rho)) throw PreconditionError("mp_solve: endpoint lies inside the geometry sphere");

    const std::size_t K = opt.path_points;
    detail::MPPath path;
    for (std::size_t k = 0; k < K; ++k) {
        path.nodes.push_back((static_cast<double>(k) / static_cast<double>(K - 1)) * end.e);
        path.energies.push_back(k == 0 ? 0.0 : k == K - 1 ? end.energy : energy(A, spec, path.nodes.back()));
    }

    GridFunction g_prev(A.grid(), true);
    detail::PathMax top = detail::path_max(A, spec, path, opt.segment_tol);
    for (std::size_t it = 0;; ++it) {
        const GridFunction G = gradient(A, spec, top.point);
        SolveStats st;
        const GridFunction g = riesz_gradient(A, G, {opt.cg_tol, 0}, &st, &g_prev);
        res.cg_iterations += st.iterations;
        const double gn = std::sqrt(std::max(0.0, A.inner(G, g)));
        MPRecord rec{it, top.value, gn, 0.0, top.segment};
        if (gn <= opt.tol) {
            res.history.push_back(rec);
            res.u_star = top.point;
            res.level = top.value;
            res.grad_norm = gn;
            res.iterations = it;
            res.path_energy = path.energies;
            res.path_arclength.assign(path.nodes.size(), 0.0);
            for (std::size_t k = 1; k < path.nodes.size(); ++k)
                res.path_arclength[k] =
                    res.path_arclength[k - 1] + energy_norm(A, path.nodes[k] - path.nodes[k - 1]);
            return res;
        }
        if (it == opt.max_iter) {
            if (!opt.dump_path.empty()) detail::dump_path(A, path, opt.dump_path);
            throw SolverError("mp_solve: no convergence in " + std::to_string(opt.max_iter) +
                              " iterations, gradient norm " + fmt(gn));
        }
        g_prev = g;

        double s = 1.0;
        bool accepted = false;
        for (std::size_t h = 0; h <= opt.max_halvings && !accepted; ++h, s *= opt.armijo_shrink) {
            try {
                GridFunction w = top.point;
                w.axpy(-s, g);
                const double Iw = energy(A, spec, w);
                if (Iw > top.value - opt.armijo_slope * s * gn * gn) continue;
                detail::MPPath trial = path;
                const std::size_t pin = detail::place(trial, top, std::move(w), Iw);
                detail::PathMax trial_top = detail::path_max(A, spec, trial, opt.segment_tol);
                if (trial_top.value > top.value) continue;
                detail::MPPath even = detail::reparameterize(A, spec, trial, pin, K);
                detail::PathMax even_top = detail::path_max(A, spec, even, opt.segment_tol);
                if (even_top.value <= trial_top.value) {
                    path = std::move(even);
                    top = std::move(even_top);
                } else {
                    path = std::move(trial);
                    top = std::move(trial_top);
                }
                accepted = true;
                rec.step = s;
            } catch (const RangeError&) {
            }
        }
        if (!accepted) {
            if (!opt.dump_path.empty()) detail::dump_path(A, path, opt.dump_path);
            throw SolverError("mp_solve: line search stagnated after " + std::to_string(opt.max_halvings) +
                              " halvings at iteration " + std::to_string(it) + ", path max " + fmt(top.value) +
                              ", gradient norm " + fmt(gn));
        }
        res.history.push_back(rec);
    }
}

struct NewtonOptions {
    double tol = 1e-9;            // weighted L2 norm of A u - f(u)
    std::size_t max_iter = 50;
    std::size_t max_halvings = 30;
    double trivial_norm = 1e-6;   // energy norm below which the limit is reported as trivial
};

struct NewtonResult {
    GridFunction u;
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    bool trivial = false;
    std::vector<double> residual_history;
};

// Damped Newton on A u = f(x, u) with Jacobian A - diag f'(u) on the interior unknowns.
inline NewtonResult newton_refine(const DiscreteOperator& A, const NonlinearitySpec& spec, const GridFunction& u0,
                                  NewtonOptions opt = {})
{
    A.require(u0, "newton_refine");
    const LogGrid& g = A.grid();
    const std::size_t mr = g.nr() - 2, my = g.ny() - 2, n = mr * my;
    const double cr = 1.0 / (g.hr() * g.hr()), cy = 1.0 / (g.hy() * g.hy());
    auto node = [&](std::size_t q) { return g.index(q / my + 1, q % my + 1); };
    auto rnorm = [&](const GridFunction& R) { return std::sqrt(A.inner(R, R)); };

    NewtonResult res;
    res.u = u0;
    res.u.enforce_dirichlet();
    GridFunction R = gradient(A, spec, res.u);
    res.residual = rnorm(R);
    res.residual_history.push_back(res.residual);

    for (std::size_t it = 0; it < opt.max_iter && res.residual > opt.tol; ++it) {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(5 * n);
        for (std::size_t q = 0; q < n; ++q) {
            const std::size_t i = q / my, j = q % my;
            trip.emplace_back(q, q, 2.0 * (cr + cy) - spec.fprime(res.u[node(q)]));
            if (i > 0) trip.emplace_back(q, q - my, -cr);
            if (i + 1 < mr) trip.emplace_back(q, q + my, -cr);
            if (j > 0) trip.emplace_back(q, q - 1, -cy);
            if (j + 1 < my) trip.emplace_back(q, q + 1, -cy);
        }
        Eigen::SparseMatrix<double> J(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        J.setFromTriplets(trip.begin(), trip.end());
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
        for (std::size_t q = 0; q < n; ++q) rhs[static_cast<Eigen::Index>(q)] = -R[node(q)];

        Eigen::VectorXd delta;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(J);
        if (ldlt.info() == Eigen::Success) delta = ldlt.solve(rhs);
        if (ldlt.info() != Eigen::Success || !delta.allFinite()) {
            Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
            lu.analyzePattern(J);
            lu.factorize(J);
            if (lu.info() != Eigen::Success) break;
            delta = lu.solve(rhs);
        }

        double a = 1.0;
        bool moved = false;
        for (std::size_t h = 0; h <= opt.max_halvings; ++h, a *= 0.5) {
            GridFunction trial = res.u;
            for (std::size_t q = 0; q < n; ++q) trial[node(q)] += a * delta[static_cast<Eigen::Index>(q)];
            GridFunction Rt;
            try {
                Rt = gradient(A, spec, trial);
            } catch (const RangeError&) {
                continue;
            }
            const double rt = rnorm(Rt);
            if (rt <= (1.0 - 1e-4 * a) * res.residual) {
                res.u = std::move(trial);
                R = std::move(Rt);
                res.residual = rt;
                moved = true;
                break;
            }
        }
        res.iterations = it + 1;
        res.residual_history.push_back(res.residual);
        if (!moved) break;
    }
    res.converged = res.residual <= opt.tol;
    res.trivial = energy_norm(A, res.u) < opt.trivial_norm;
    return res;
}

}  // namespace conemt
