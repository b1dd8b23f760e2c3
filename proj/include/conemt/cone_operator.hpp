#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "cone_domain.hpp"
#include "error.hpp"
#include "io.hpp"

namespace conemt {

// -Delta_B in log coordinates: the flat 5-point Laplacian with Dirichlet zero on every
// edge. Boundary values of the input are ignored and those of the output are zero.
class DiscreteOperator {
public:
    explicit DiscreteOperator(const LogGrid& g) : grid_(g)
    {
        if (g.nr() < 3 || g.ny() < 3) throw DomainError("DiscreteOperator: need at least one interior node");
        cr_ = 1.0 / (g.hr() * g.hr());
        cy_ = 1.0 / (g.hy() * g.hy());
    }

    const LogGrid& grid() const { return grid_; }
    double diagonal() const { return 2.0 * (cr_ + cy_); }

    void apply(const std::vector<double>& u, std::vector<double>& out) const
    {
        const std::size_t nr = grid_.nr(), ny = grid_.ny();
        out.assign(grid_.size(), 0.0);
        for (std::size_t i = 1; i + 1 < nr; ++i)
            for (std::size_t j = 1; j + 1 < ny; ++j) {
                const std::size_t k = i * ny + j;
                const double w = i > 1 ? u[k - ny] : 0.0;
                const double e = i + 2 < nr ? u[k + ny] : 0.0;
                const double s = j > 1 ? u[k - 1] : 0.0;
                const double n = j + 2 < ny ? u[k + 1] : 0.0;
                out[k] = cr_ * (2.0 * u[k] - w - e) + cy_ * (2.0 * u[k] - s - n);
            }
    }

    GridFunction apply(const GridFunction& u) const
    {
        require(u, "apply");
        GridFunction out(grid_, true);
        apply(u.values(), out.values());
        return out;
    }

    // hr hy sum over interior nodes
    double inner(const std::vector<double>& a, const std::vector<double>& b) const
    {
        const std::size_t nr = grid_.nr(), ny = grid_.ny();
        double s = 0.0;
        for (std::size_t i = 1; i + 1 < nr; ++i)
            for (std::size_t j = 1; j + 1 < ny; ++j) s += a[i * ny + j] * b[i * ny + j];
        return s * grid_.hr() * grid_.hy();
    }

    double inner(const GridFunction& a, const GridFunction& b) const
    {
        require(a, "inner");
        require(b, "inner");
        return inner(a.values(), b.values());
    }

    // <A u, u>_h
    double energy(const GridFunction& u) const { return inner(apply(u), u); }

    void require(const GridFunction& u, const char* where) const
    {
        if (!(u.grid() == grid_)) throw ShapeError(std::string("DiscreteOperator::") + where + ": grid mismatch");
    }

private:
    LogGrid grid_;
    double cr_ = 0.0, cy_ = 0.0;
};

struct CGOptions {
    double tol = 1e-10;          // relative residual |A u - b| / |b|
    std::size_t max_iter = 0;    // 0 means 10 * number of nodes
};

struct SolveStats {
    std::size_t iterations = 0;
    double residual = 0.0;
};

namespace detail {

inline void zero_boundary(const LogGrid& g, std::vector<double>& v)
{
    for (std::size_t i = 0; i < g.nr(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j)
            if (g.is_boundary(i, j)) v[g.index(i, j)] = 0.0;
}

}  // namespace detail

// Conjugate gradients on the interior unknowns, optionally warm-started.
inline GridFunction solve(const DiscreteOperator& A, const GridFunction& b, CGOptions opt = {},
                          SolveStats* stats = nullptr, const GridFunction* guess = nullptr)
{
    A.require(b, "solve");
    b.check_finite("solve");
    if (!(opt.tol > 0.0)) throw DomainError("solve: tol must be positive");
    const LogGrid& g = A.grid();
    const std::size_t max_iter = opt.max_iter ? opt.max_iter : 10 * g.size();

    std::vector<double> rhs = b.values();
    detail::zero_boundary(g, rhs);
    GridFunction x(g, true);
    const double bnorm = std::sqrt(A.inner(rhs, rhs));
    SolveStats local;
    if (bnorm == 0.0) {
        if (stats) *stats = local;
        return x;
    }
    if (guess) {
        A.require(*guess, "solve");
        x.values() = guess->values();
        detail::zero_boundary(g, x.values());
    }

    std::vector<double> r(g.size()), p, q;
    A.apply(x.values(), q);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = rhs[k] - q[k];
    p = r;
    double rr = A.inner(r, r);
    std::size_t it = 0;
    while (std::sqrt(rr) > opt.tol * bnorm) {
        if (it == max_iter)
            throw SolverError("solve: CG did not converge in " + std::to_string(max_iter) +
                              " iterations, relative residual " + fmt(std::sqrt(rr) / bnorm));
        A.apply(p, q);
        const double alpha = rr / A.inner(p, q);
        auto& xv = x.values();
        for (std::size_t k = 0; k < r.size(); ++k) {
            xv[k] += alpha * p[k];
            r[k] -= alpha * q[k];
        }
        const double rr_new = A.inner(r, r);
        const double beta = rr_new / rr;
        for (std::size_t k = 0; k < r.size(); ++k) p[k] = r[k] + beta * p[k];
        rr = rr_new;
        ++it;
    }
    local.iterations = it;
    local.residual = std::sqrt(rr) / bnorm;
    if (stats) *stats = local;
    return x;
}

struct EigenResult {
    double lambda1 = 0.0;
    GridFunction eigenfunction;   // unit weighted L2 norm, positive inside
    double residual = 0.0;        // |A v - lambda v| / |v|
    std::size_t iterations = 0;   // outer iterations
    std::size_t cg_iterations = 0;

    void write_csv(const std::string& path) const { conemt::write_csv(eigenfunction, path); }
};

// Inverse power iteration from start (default: the product of half-sines over the box).
// Each CG solve starts from v / lambda, so late solves only have to remove the small
// eigen-residual.
inline EigenResult first_eigenvalue(const DiscreteOperator& A, double tol = 1e-8, std::size_t max_outer = 5000,
                                    const GridFunction* start = nullptr)
{
    if (!(tol > 0.0)) throw DomainError("first_eigenvalue: tol must be positive");
    const LogGrid& g = A.grid();
    const ConeDomain& d = g.domain();
    const double Lr = d.r_hi() - d.r_lo(), Ly = d.y_hi() - d.y_lo();
    GridFunction v = start ? *start
                           : GridFunction::sample(
                                 g,
                                 [&](double r, double y) {
                                     return std::sin(std::numbers::pi * (r - d.r_lo()) / Lr) *
                                            std::sin(std::numbers::pi * (y - d.y_lo()) / Ly);
                                 },
                                 true);
    A.require(v, "first_eigenvalue");
    v.enforce_dirichlet();
    const double vn = std::sqrt(A.inner(v, v));
    if (vn == 0.0) throw PreconditionError("first_eigenvalue: start vector vanishes");
    v *= 1.0 / vn;

    EigenResult res;
    GridFunction Av = A.apply(v);
    double lambda = A.inner(Av, v);
    for (std::size_t outer = 0; outer < max_outer; ++outer) {
        GridFunction r = Av;
        r.axpy(-lambda, v);
        res.residual = std::sqrt(A.inner(r, r));
        if (res.residual <= tol) {
            res.lambda1 = lambda;
            res.iterations = outer;
            double sum = 0.0;
            for (double x : v.values()) sum += x;
            if (sum < 0.0) v *= -1.0;
            res.eigenfunction = std::move(v);
            return res;
        }
        GridFunction guess = v;
        guess *= 1.0 / lambda;
        SolveStats st;
        // the solve need only be accurate relative to the current eigen-residual
        CGOptions cg{std::max(1e-13, std::min(1e-3, 1e-2 * res.residual / lambda)), 0};
        GridFunction w = solve(A, v, cg, &st, &guess);
        res.cg_iterations += st.iterations;
        v = std::move(w);
        v *= 1.0 / std::sqrt(A.inner(v, v));
        Av = A.apply(v);
        lambda = A.inner(Av, v);
    }
    throw SolverError("first_eigenvalue: no convergence after " + std::to_string(max_outer) +
                      " outer iterations, residual " + fmt(res.residual));
}

// g with A g = G: the gradient represented in the energy inner product <A ., .>_h.
inline GridFunction riesz_gradient(const DiscreteOperator& A, const GridFunction& residual, CGOptions opt = {},
                                   SolveStats* stats = nullptr, const GridFunction* guess = nullptr)
{
    residual.check_finite("riesz_gradient");
    return solve(A, residual, opt, stats, guess);
}

// (pi/Lr)^2 + (pi/Ly)^2 for the box of the domain
inline double separable_eigenvalue(const ConeDomain& d)
{
    const double a = std::numbers::pi / (d.r_hi() - d.r_lo()), b = std::numbers::pi / (d.y_hi() - d.y_lo());
    return a * a + b * b;
}

}  // namespace conemt
