#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "cone_domain.hpp"
#include "error.hpp"
#include "io.hpp"
#include "quadrature.hpp"

namespace conemt {

// A radial function of the log-metric radius rho about the log-origin, smooth
// between its breakpoints, with an analytic slope.
struct RadialFunction {
    std::function<double(double)> value;
    std::function<double(double)> slope;
    std::vector<double> breakpoints;  // 0 = b_0 < b_1 < ... < b_m = support radius

    double support() const { return breakpoints.back(); }
    double smallest_feature() const { return breakpoints.size() > 1 ? breakpoints[1] : support(); }
};

// 2 pi int_0^support G(rho) rho drho, Gauss-Legendre per piece. The innermost piece
// is integrated in rho, the others in s = ln rho, split into panels of width <= 0.25.
template <class G>
double radial_integral(const RadialFunction& f, G&& g, std::size_t order = 20)
{
    const auto& b = f.breakpoints;
    if (b.size() < 2 || b.front() != 0.0) throw DomainError("RadialFunction: breakpoints must start at 0");
    const GaussRule& rule = gauss_legendre(order);
    double total = gauss_integrate([&](double rho) { return g(rho) * rho; }, 0.0, b[1], rule);
    for (std::size_t k = 1; k + 1 < b.size(); ++k) {
        const double s0 = std::log(b[k]), s1 = std::log(b[k + 1]);
        const auto panels = static_cast<std::size_t>(std::ceil((s1 - s0) / 0.25));
        const double w = (s1 - s0) / static_cast<double>(panels);
        for (std::size_t p = 0; p < panels; ++p) {
            const double a = s0 + w * static_cast<double>(p);
            total += gauss_integrate(
                [&](double s) {
                    const double rho = std::exp(s);
                    return g(rho) * rho * rho;
                },
                a, p + 1 == panels ? s1 : a + w, rule);
        }
    }
    return 2.0 * std::numbers::pi * total;
}

inline double dirichlet_energy(const RadialFunction& f)
{
    return radial_integral(f, [&](double rho) {
        const double d = f.slope(rho);
        return d * d;
    });
}

inline double l2_squared(const RadialFunction& f)
{
    return radial_integral(f, [&](double rho) {
        const double v = f.value(rho);
        return v * v;
    });
}

// Nodes uniform in rho on the innermost piece and log-uniform outside it, with n
// nodes per piece or per unit of ln rho; every breakpoint is a node.
inline std::vector<double> radial_nodes(const RadialFunction& f, std::size_t n)
{
    const auto& b = f.breakpoints;
    std::vector<double> rho;
    for (std::size_t k = 0; k < n; ++k) rho.push_back(b[1] * static_cast<double>(k) / static_cast<double>(n));
    for (std::size_t k = 1; k + 1 < b.size(); ++k) {
        const double s0 = std::log(b[k]), s1 = std::log(b[k + 1]);
        const auto m = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil((s1 - s0) * static_cast<double>(n))));
        for (std::size_t j = 0; j < m; ++j)
            rho.push_back(std::exp(s0 + (s1 - s0) * static_cast<double>(j) / static_cast<double>(m)));
    }
    rho.push_back(b.back());
    return rho;
}

// Energy of the piecewise-linear interpolant on radial_nodes(f, n).
inline double sampled_dirichlet_energy(const RadialFunction& f, std::size_t n = 200)
{
    const std::vector<double> rho = radial_nodes(f, n);
    double e = 0.0;
    for (std::size_t k = 0; k + 1 < rho.size(); ++k) {
        const double dv = f.value(rho[k + 1]) - f.value(rho[k]);
        const double dr = rho[k + 1] - rho[k];
        e += std::numbers::pi * dv * dv * (rho[k + 1] + rho[k]) / dr;
    }
    return e;
}

// Samples f(|x - c|) onto a grid; the support must lie strictly inside the box and
// the smallest feature must span at least min_cells cells.
inline GridFunction sample_radial(const RadialFunction& f, const LogGrid& g, double cr = 0.0, double cy = 0.0,
                                  double min_cells = 4.0)
{
    const ConeDomain& d = g.domain();
    const double R = f.support();
    if (cr - R <= d.r_lo() || cr + R >= d.r_hi() || cy - R <= d.y_lo() || cy + R >= d.y_hi())
        throw SupportOverflow("sample_radial: support of radius " + fmt(R) + " does not fit the grid box");
    if (f.smallest_feature() < min_cells * std::max(g.hr(), g.hy()))
        throw ResolutionError("sample_radial: smallest radial feature " + fmt(f.smallest_feature()) +
                              " spans fewer than " + fmt(min_cells) + " cells");
    return GridFunction::sample(
        g, [&](double r, double y) { return f.value(std::hypot(r - cr, y - cy)); }, true);
}

enum class RadialVariable { rho, moser_t };

// Sampled 1-D profile. A rho profile is nonincreasing, linear in the enclosed measure
// pi rho^2 between nodes, extended by its first value towards 0 and by 0 beyond the
// grid. A moser_t profile is nondecreasing, linear in t, extended by its last value.
class RadialProfile {
public:
    RadialProfile() = default;
    RadialProfile(RadialVariable var, std::vector<double> grid, std::vector<double> values, bool check = true)
        : var_(var), grid_(std::move(grid)), values_(std::move(values))
    {
        if (grid_.size() != values_.size() || grid_.empty()) throw ShapeError("RadialProfile: grid/value size mismatch");
        if (check) validate();
    }

    void validate() const
    {
        for (std::size_t k = 0; k < grid_.size(); ++k) {
            if (!std::isfinite(values_[k]) || values_[k] < 0.0)
                throw PreconditionError("RadialProfile: values must be finite and nonnegative");
            if (k == 0) continue;
            if (!(grid_[k] > grid_[k - 1])) throw PreconditionError("RadialProfile: grid must be strictly increasing");
            if (var_ == RadialVariable::rho ? values_[k] > values_[k - 1] : values_[k] < values_[k - 1])
                throw PreconditionError("RadialProfile: values are not monotone in the profile direction");
        }
    }

    RadialVariable variable() const { return var_; }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return grid_.size(); }

    double operator()(double x) const
    {
        if (x <= grid_.front()) return values_.front();
        if (x >= grid_.back()) return var_ == RadialVariable::rho ? (x == grid_.back() ? values_.back() : 0.0)
                                                                  : values_.back();
        auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
        const std::size_t k = static_cast<std::size_t>(it - grid_.begin()) - 1;
        const double s = (coord(x) - coord(grid_[k])) / (coord(grid_[k + 1]) - coord(grid_[k]));
        return values_[k] + s * (values_[k + 1] - values_[k]);
    }

    // interpolation coordinate: rho^2 for rho profiles, t otherwise
    double coord(double x) const { return var_ == RadialVariable::rho ? x * x : x; }

    double max_value() const { return *std::max_element(values_.begin(), values_.end()); }

    // largest abscissa with a positive value (0 if the profile vanishes)
    double support() const
    {
        for (std::size_t k = grid_.size(); k-- > 0;)
            if (values_[k] > 0.0) return k + 1 < grid_.size() ? grid_[k + 1] : grid_[k];
        return 0.0;
    }

    // f on radial_nodes(f, n)
    static RadialProfile sample(const RadialFunction& f, std::size_t n);

    void write_csv(const std::string& path) const
    {
        CsvWriter w({var_ == RadialVariable::rho ? "rho" : "t", "value"});
        for (std::size_t k = 0; k < grid_.size(); ++k) w.row({grid_[k], values_[k]});
        w.save(path);
    }

private:
    RadialVariable var_ = RadialVariable::rho;
    std::vector<double> grid_, values_;
};

inline RadialProfile RadialProfile::sample(const RadialFunction& f, std::size_t n)
{
    std::vector<double> rho = radial_nodes(f, n), v(rho.size());
    for (std::size_t k = 0; k < rho.size(); ++k) v[k] = f.value(rho[k]);
    return RadialProfile(RadialVariable::rho, std::move(rho), std::move(v));
}

// 2 pi int G(p(rho)) rho drho for a rho profile: the core disk below the first node
// at the first value, then three-point Gauss in m = pi rho^2 on each linear piece.
template <class G>
double profile_integral(const RadialProfile& p, G&& g)
{
    if (p.variable() != RadialVariable::rho) throw PreconditionError("profile_integral: needs a rho profile");
    const auto& x = p.grid();
    const auto& v = p.values();
    const GaussRule& rule = gauss_legendre(3);
    double total = std::numbers::pi * x[0] * x[0] * g(v[0]);
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        if (v[k] == 0.0 && v[k + 1] == 0.0 && g(0.0) == 0.0) continue;
        const double a = std::numbers::pi * x[k] * x[k], b = std::numbers::pi * x[k + 1] * x[k + 1];
        total += gauss_integrate([&](double m) { return g(v[k] + (m - a) / (b - a) * (v[k + 1] - v[k])); }, a, b, rule);
    }
    return total;
}

// exact Dirichlet energy of the rho profile: 2 pi dv^2 (rho_1^2 + rho_0^2) / (rho_1^2 - rho_0^2) per piece
inline double profile_dirichlet_energy(const RadialProfile& p)
{
    if (p.variable() != RadialVariable::rho) throw PreconditionError("profile_dirichlet_energy: needs a rho profile");
    const auto& x = p.grid();
    const auto& v = p.values();
    double e = 0.0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const double dv = v[k + 1] - v[k], a = x[k] * x[k], b = x[k + 1] * x[k + 1];
        e += 2.0 * std::numbers::pi * dv * dv * (b + a) / (b - a);
    }
    return e;
}

// First abscissa where the profile passes through level, or NaN if it never does.
inline double first_crossing(const RadialProfile& p, double level)
{
    const auto& x = p.grid();
    const auto& v = p.values();
    const bool down = p.variable() == RadialVariable::rho;
    if (down ? v[0] <= level : v[0] >= level) return x[0];
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        if (down ? v[k + 1] <= level : v[k + 1] >= level) {
            const double a = p.coord(x[k]), b = p.coord(x[k + 1]);
            const double c = a + (level - v[k]) / (v[k + 1] - v[k]) * (b - a);
            return down ? std::sqrt(c) : c;
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace conemt
