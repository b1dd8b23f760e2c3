#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace conemt {

// The stretched cone in log coordinates r = -ln x1, y = x2.
//   bounded_strip: [0,1) x (-1,1), i.e. r in [0, r_max], y in [-1, 1]
//   full_cone:     R^2_+ truncated to the square [-r_max, r_max]^2
enum class DomainKind : unsigned { bounded_strip = 0, full_cone = 1 };

inline const char* to_string(DomainKind k)
{
    return k == DomainKind::bounded_strip ? "bounded_strip" : "full_cone";
}

struct ConeDomain {
    DomainKind kind = DomainKind::bounded_strip;
    double r_max = 8.0;

    ConeDomain() = default;
    ConeDomain(DomainKind k, double rmax) : kind(k), r_max(rmax)
    {
        if (!(r_max > 0.0) || !std::isfinite(r_max))
            throw DomainError("ConeDomain: r_max must be positive and finite");
    }

    double r_lo() const { return kind == DomainKind::full_cone ? -r_max : 0.0; }
    double r_hi() const { return r_max; }
    double y_lo() const { return kind == DomainKind::full_cone ? -r_max : -1.0; }
    double y_hi() const { return kind == DomainKind::full_cone ? r_max : 1.0; }

    bool operator==(const ConeDomain&) const = default;
};

class LogGrid {
public:
    LogGrid() = default;
    LogGrid(ConeDomain d, std::size_t nr, std::size_t ny) : domain_(d), nr_(nr), ny_(ny)
    {
        if (nr < 3 || ny < 3) throw ShapeError("LogGrid: need at least 3 nodes per direction");
        hr_ = (d.r_hi() - d.r_lo()) / static_cast<double>(nr - 1);
        hy_ = (d.y_hi() - d.y_lo()) / static_cast<double>(ny - 1);
    }

    const ConeDomain& domain() const { return domain_; }
    std::size_t nr() const { return nr_; }
    std::size_t ny() const { return ny_; }
    std::size_t size() const { return nr_ * ny_; }
    double hr() const { return hr_; }
    double hy() const { return hy_; }

    double r(std::size_t i) const
    {
        return i + 1 == nr_ ? domain_.r_hi() : domain_.r_lo() + static_cast<double>(i) * hr_;
    }
    double y(std::size_t j) const
    {
        return j + 1 == ny_ ? domain_.y_hi() : domain_.y_lo() + static_cast<double>(j) * hy_;
    }
    double x1(std::size_t i) const { return std::exp(-r(i)); }

    // r index outer, y index inner (row-major in r)
    std::size_t index(std::size_t i, std::size_t j) const { return i * ny_ + j; }

    bool is_boundary(std::size_t i, std::size_t j) const
    {
        return i == 0 || j == 0 || i + 1 == nr_ || j + 1 == ny_;
    }

    // trapezoid tensor weight of node (i, j) for the measure dr dy
    double weight(std::size_t i, std::size_t j) const
    {
        double wr = (i == 0 || i + 1 == nr_) ? 0.5 * hr_ : hr_;
        double wy = (j == 0 || j + 1 == ny_) ? 0.5 * hy_ : hy_;
        return wr * wy;
    }

    bool operator==(const LogGrid& o) const
    {
        return domain_ == o.domain_ && nr_ == o.nr_ && ny_ == o.ny_;
    }

private:
    ConeDomain domain_{};
    std::size_t nr_ = 0, ny_ = 0;
    double hr_ = 0.0, hy_ = 0.0;
};

class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(const LogGrid& g, bool dirichlet = false)
        : grid_(g), values_(g.size(), 0.0), dirichlet_(dirichlet) {}
    GridFunction(const LogGrid& g, std::vector<double> v, bool dirichlet = false)
        : grid_(g), values_(std::move(v)), dirichlet_(dirichlet)
    {
        if (values_.size() != g.size()) throw ShapeError("GridFunction: value count does not match grid");
        if (dirichlet_) enforce_dirichlet();
    }

    // f(r, y) sampled at the nodes
    template <class F>
    static GridFunction sample(const LogGrid& g, F&& f, bool dirichlet = false)
    {
        GridFunction u(g, dirichlet);
        for (std::size_t i = 0; i < g.nr(); ++i)
            for (std::size_t j = 0; j < g.ny(); ++j)
                u.values_[g.index(i, j)] = f(g.r(i), g.y(j));
        if (dirichlet) u.enforce_dirichlet();
        return u;
    }

    const LogGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    bool dirichlet() const { return dirichlet_; }
    std::size_t size() const { return values_.size(); }

    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }
    double at(std::size_t i, std::size_t j) const { return values_[grid_.index(i, j)]; }
    double& at(std::size_t i, std::size_t j) { return values_[grid_.index(i, j)]; }

    void enforce_dirichlet()
    {
        dirichlet_ = true;
        for (std::size_t i = 0; i < grid_.nr(); ++i)
            for (std::size_t j = 0; j < grid_.ny(); ++j)
                if (grid_.is_boundary(i, j)) values_[grid_.index(i, j)] = 0.0;
    }

    void check_finite(const char* where) const
    {
        for (double v : values_)
            if (!std::isfinite(v)) throw NumericError(std::string(where) + ": non-finite grid value");
    }

    double max_abs() const
    {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    GridFunction& operator+=(const GridFunction& o)
    {
        require_same(o);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
        return *this;
    }
    GridFunction& operator-=(const GridFunction& o)
    {
        require_same(o);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
        return *this;
    }
    GridFunction& operator*=(double c)
    {
        for (double& v : values_) v *= c;
        return *this;
    }
    // this += a * x
    GridFunction& axpy(double a, const GridFunction& x)
    {
        require_same(x);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += a * x.values_[k];
        return *this;
    }

    void require_same(const GridFunction& o) const
    {
        if (!(grid_ == o.grid_)) throw ShapeError("GridFunction: grid mismatch");
    }

private:
    LogGrid grid_{};
    std::vector<double> values_;
    bool dirichlet_ = false;
};

inline GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
inline GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
inline GridFunction operator*(double c, GridFunction a) { return a *= c; }

inline std::pair<double, double> to_log(double x1, double x2)
{
    if (!(x1 > 0.0)) throw DomainError("to_log: x1 must be positive (the conical point is not representable)");
    return {-std::log(x1), x2};
}

inline std::pair<double, double> from_log(double r, double y) { return {std::exp(-r), y}; }

// (S u)(r, x) = e^{-((n+1)/2 - gamma) r} u(e^{-r}, x); u holds the values u(t_i, x_j)
// at t_i = e^{-r_i}, so only the weight is applied here.
inline GridFunction s_map(const GridFunction& u, double gamma, int n = 1)
{
    const LogGrid& g = u.grid();
    const double a = 0.5 * (n + 1) - gamma;
    GridFunction out(g, std::vector<double>(u.values()), false);
    if (a == 0.0) return out;
    for (std::size_t i = 0; i < g.nr(); ++i) {
        const double w = std::exp(-a * g.r(i));
        for (std::size_t j = 0; j < g.ny(); ++j) out.at(i, j) *= w;
    }
    return out;
}

inline double integrate(const GridFunction& u)
{
    const LogGrid& g = u.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < g.nr(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < g.ny(); ++j) {
            double v = u.at(i, j);
            if (!std::isfinite(v)) throw NumericError("integrate: non-finite grid value");
            row += (j == 0 || j + 1 == g.ny() ? 0.5 : 1.0) * v;
        }
        s += (i == 0 || i + 1 == g.nr() ? 0.5 : 1.0) * row;
    }
    return s * g.hr() * g.hy();
}

enum class DiffOrder { second = 2, fourth = 4 };

namespace detail {

// derivative along a strided line of n samples with spacing h
inline void differentiate_line(const double* f, std::size_t stride, std::size_t n, double h,
                               DiffOrder order, double* out, std::size_t out_stride)
{
    auto F = [&](std::size_t k) { return f[k * stride]; };
    if (order == DiffOrder::second) {
        out[0] = (-3.0 * F(0) + 4.0 * F(1) - F(2)) / (2.0 * h);
        for (std::size_t k = 1; k + 1 < n; ++k) out[k * out_stride] = (F(k + 1) - F(k - 1)) / (2.0 * h);
        out[(n - 1) * out_stride] = (3.0 * F(n - 1) - 4.0 * F(n - 2) + F(n - 3)) / (2.0 * h);
        return;
    }
    if (n < 5) throw ShapeError("fourth-order differences need at least 5 nodes per direction");
    const double d = 12.0 * h;
    out[0] = (-25.0 * F(0) + 48.0 * F(1) - 36.0 * F(2) + 16.0 * F(3) - 3.0 * F(4)) / d;
    out[out_stride] = (-3.0 * F(0) - 10.0 * F(1) + 18.0 * F(2) - 6.0 * F(3) + F(4)) / d;
    for (std::size_t k = 2; k + 2 < n; ++k)
        out[k * out_stride] = (F(k - 2) - 8.0 * F(k - 1) + 8.0 * F(k + 1) - F(k + 2)) / d;
    const std::size_t m = n - 1;
    out[(m - 1) * out_stride] = (3.0 * F(m) + 10.0 * F(m - 1) - 18.0 * F(m - 2) + 6.0 * F(m - 3) - F(m - 4)) / d;
    out[m * out_stride] = (25.0 * F(m) - 48.0 * F(m - 1) + 36.0 * F(m - 2) - 16.0 * F(m - 3) + 3.0 * F(m - 4)) / d;
}

}  // namespace detail

// Returns (x1 d/dx1 u, d/dx2 u) = (-du/dr, du/dy).
inline std::pair<GridFunction, GridFunction> cone_gradient(const GridFunction& u,
                                                           DiffOrder order = DiffOrder::second)
{
    const LogGrid& g = u.grid();
    GridFunction gr(g), gy(g);
    const double* v = u.values().data();
    for (std::size_t j = 0; j < g.ny(); ++j)
        detail::differentiate_line(v + j, g.ny(), g.nr(), g.hr(), order, gr.values().data() + j, g.ny());
    for (double& x : gr.values()) x = -x;
    for (std::size_t i = 0; i < g.nr(); ++i)
        detail::differentiate_line(v + g.index(i, 0), 1, g.ny(), g.hy(), order,
                                   gy.values().data() + g.index(i, 0), 1);
    return {std::move(gr), std::move(gy)};
}

// Bilinear interpolation in log coordinates; zero outside the grid box.
inline double interpolate(const GridFunction& u, double r, double y)
{
    const LogGrid& g = u.grid();
    const ConeDomain& d = g.domain();
    if (r < d.r_lo() || r > d.r_hi() || y < d.y_lo() || y > d.y_hi()) return 0.0;
    double a = (r - d.r_lo()) / g.hr(), b = (y - d.y_lo()) / g.hy();
    auto i = std::min(static_cast<std::size_t>(a), g.nr() - 2);
    auto j = std::min(static_cast<std::size_t>(b), g.ny() - 2);
    double s = a - static_cast<double>(i), t = b - static_cast<double>(j);
    return (1 - s) * (1 - t) * u.at(i, j) + s * (1 - t) * u.at(i + 1, j) +
           (1 - s) * t * u.at(i, j + 1) + s * t * u.at(i + 1, j + 1);
}

}  // namespace conemt
