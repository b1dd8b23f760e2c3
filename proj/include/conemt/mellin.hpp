#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"
#include "io.hpp"

namespace conemt {

using cplx = std::complex<double>;

// Samples of u on the log-uniform grid t_j = e^{s_j}, s_j uniform in [-s_max, s_max].
class HalfLineFunction {
public:
    HalfLineFunction() = default;
    HalfLineFunction(double s_max, std::size_t n, std::vector<double> values)
        : s_max_(s_max), n_(n), values_(std::move(values))
    {
        if (!(s_max > 0.0) || n < 3) throw DomainError("HalfLineFunction: need s_max > 0 and n >= 3");
        if (values_.size() != n) throw ShapeError("HalfLineFunction: value count does not match grid");
        for (double v : values_)
            if (!std::isfinite(v)) throw NumericError("HalfLineFunction: non-finite value");
    }

    // Keeps the callable so that u(t^beta) can be resampled exactly.
    static HalfLineFunction from_callable(std::function<double(double)> u, double s_max, std::size_t n)
    {
        std::vector<double> v(n);
        HalfLineFunction tmp;
        tmp.s_max_ = s_max;
        tmp.n_ = n;
        for (std::size_t j = 0; j < n; ++j) v[j] = u(std::exp(tmp.s(j)));
        HalfLineFunction f(s_max, n, std::move(v));
        f.source_ = std::move(u);
        return f;
    }

    double s_max() const { return s_max_; }
    std::size_t size() const { return n_; }
    double h() const { return 2.0 * s_max_ / static_cast<double>(n_ - 1); }
    double s(std::size_t j) const
    {
        return j + 1 == n_ ? s_max_ : -s_max_ + static_cast<double>(j) * h();
    }
    double t(std::size_t j) const { return std::exp(s(j)); }
    const std::vector<double>& values() const { return values_; }
    bool has_source() const { return static_cast<bool>(source_); }
    const std::function<double(double)>& source() const { return source_; }

    // same grid, new values
    HalfLineFunction with_values(std::vector<double> v) const
    {
        return HalfLineFunction(s_max_, n_, std::move(v));
    }

private:
    double s_max_ = 0.0;
    std::size_t n_ = 0;
    std::vector<double> values_;
    std::function<double(double)> source_;
};

struct MellinSamples {
    double gamma = 0.5;
    std::vector<double> tau;    // uniform
    std::vector<cplx> values;
    bool truncated = false;     // u did not decay at the grid ends

    double line() const { return 0.5 - gamma; }
    cplx z(std::size_t k) const { return {line(), tau[k]}; }
};

inline std::vector<double> uniform_tau(double tau_max, std::size_t n)
{
    if (n < 2 || !(tau_max > 0.0)) throw DomainError("uniform_tau: need n >= 2 and tau_max > 0");
    std::vector<double> tau(n);
    const double d = 2.0 * tau_max / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) tau[k] = -tau_max + static_cast<double>(k) * d;
    tau.back() = tau_max;
    return tau;
}

// Trapezoid in s of e^{z s} u(e^s) at arbitrary complex z. The phase e^{i Im z s_j}
// is advanced by a recurrence and re-anchored every 64 steps; the summation order is fixed.
inline cplx mellin_at(const HalfLineFunction& u, cplx z)
{
    const std::size_t n = u.size();
    const double h = u.h();
    const double a = z.real(), b = z.imag();
    const cplx step = std::polar(1.0, b * h);
    cplx phase;
    cplx sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j % 64 == 0) phase = std::polar(1.0, b * u.s(j));
        const double c = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
        sum += c * u.values()[j] * std::exp(a * u.s(j)) * phase;
        phase *= step;
    }
    return sum * h;
}

namespace detail {

// mellin_at along a vertical line Re z = a, at Im z = b[k]; e^{a s_j} is shared across k
inline std::vector<cplx> mellin_line(const HalfLineFunction& u, double a, const std::vector<double>& b)
{
    const std::size_t n = u.size();
    const double h = u.h();
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j)
        w[j] = ((j == 0 || j + 1 == n) ? 0.5 : 1.0) * u.values()[j] * std::exp(a * u.s(j));
    // Real arithmetic, since std::complex products go through the NaN-checking libcall. Eight
    // lines run interleaved so their rotation chains overlap; each line's operations are unchanged.
    constexpr std::size_t B = 8;
    std::vector<cplx> out(b.size());
    for (std::size_t k0 = 0; k0 < b.size(); k0 += B) {
        const std::size_t nb = std::min(B, b.size() - k0);
        double bk[B] = {}, sc[B], ss[B], pc[B] = {}, ps[B] = {}, re[B] = {}, im[B] = {};
        for (std::size_t q = 0; q < nb; ++q) bk[q] = b[k0 + q];
        for (std::size_t q = 0; q < B; ++q) {
            sc[q] = std::cos(bk[q] * h);
            ss[q] = std::sin(bk[q] * h);
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (j % 64 == 0)
                for (std::size_t q = 0; q < B; ++q) {
                    pc[q] = std::cos(bk[q] * u.s(j));
                    ps[q] = std::sin(bk[q] * u.s(j));
                }
            for (std::size_t q = 0; q < B; ++q) {
                re[q] += w[j] * pc[q];
                im[q] += w[j] * ps[q];
                const double t = pc[q] * sc[q] - ps[q] * ss[q];
                ps[q] = pc[q] * ss[q] + ps[q] * sc[q];
                pc[q] = t;
            }
        }
        for (std::size_t q = 0; q < nb; ++q) out[k0 + q] = cplx(re[q], im[q]) * h;
    }
    return out;
}

}  // namespace detail

inline bool decays_at_ends(const HalfLineFunction& u, double line, double rel = 1e-12)
{
    double peak = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j)
        peak = std::max(peak, std::abs(u.values()[j] * std::exp(line * u.s(j))));
    if (peak == 0.0) return true;
    const std::size_t n = u.size();
    return std::abs(u.values()[0] * std::exp(line * u.s(0))) <= rel * peak &&
           std::abs(u.values()[n - 1] * std::exp(line * u.s(n - 1))) <= rel * peak;
}

inline MellinSamples mellin_transform(const HalfLineFunction& u, double gamma, const std::vector<double>& tau)
{
    MellinSamples m;
    m.gamma = gamma;
    m.tau = tau;
    m.values.resize(tau.size());
    m.values = detail::mellin_line(u, m.line(), tau);
    m.truncated = !decays_at_ends(u, m.line());
    return m;
}

// tail of |F| at the window ends relative to its peak
inline double tail_ratio(const MellinSamples& F)
{
    double peak = 0.0;
    for (const cplx& v : F.values) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) return 0.0;
    return std::max(std::abs(F.values.front()), std::abs(F.values.back())) / peak;
}

// Window [-40, 40] with 4096 samples, doubled until the tail drops below tail_tol.
inline MellinSamples mellin_transform_auto(const HalfLineFunction& u, double gamma, double tau_max = 40.0,
                                           std::size_t n = 4096, double tail_tol = 1e-10, int max_doublings = 6)
{
    for (int d = 0;; ++d) {
        MellinSamples m = mellin_transform(u, gamma, uniform_tau(tau_max, n));
        if (tail_ratio(m) <= tail_tol) return m;
        if (d == max_doublings) throw NumericError("mellin_transform: spectrum does not decay inside the frequency window");
        tau_max *= 2.0;
        n *= 2;
    }
}

// (1/2 pi) int t^{-z} F(z) dtau along Re z = 1/2 - gamma, trapezoid in tau.
inline HalfLineFunction mellin_inverse(const MellinSamples& F, double s_max, std::size_t n, double tail_tol = 1e-10)
{
    if (F.tau.size() != F.values.size() || F.tau.size() < 2) throw ShapeError("mellin_inverse: malformed samples");
    if (tail_ratio(F) > tail_tol)
        throw NumericError("mellin_inverse: insufficient tau range (aliasing), tail above tolerance");
    const double dtau = F.tau[1] - F.tau[0];
    const std::size_t m = F.tau.size();
    HalfLineFunction grid(s_max, n, std::vector<double>(n, 0.0));
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double s = grid.s(j);
        cplx sum = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double c = (k == 0 || k + 1 == m) ? 0.5 : 1.0;
            sum += c * std::exp(-F.z(k) * s) * F.values[k];
        }
        out[j] = (sum * dtau).real() / (2.0 * std::numbers::pi);
    }
    return grid.with_values(std::move(out));
}

struct IdentityReport {
    double gamma = 0.5, p = 0.5, beta = 2.0;
    double derivative = 0.0;   // M((-t d_t) u)(z) = z Mu(z)
    double shift = 0.0;        // M(t^{-p} u)(z) = Mu(z - p)
    double logarithm = 0.0;    // M((log t) u)(z) = d_z Mu(z)
    double dilation = 0.0;     // M(u(t^beta))(z) = beta^{-1} Mu(z / beta)

    double worst() const { return std::max({derivative, shift, logarithm, dilation}); }
};

// max |a - b| / max |b| over the sampled line
inline double sup_relative(const std::vector<cplx>& a, const std::vector<cplx>& b, std::size_t from = 0,
                           std::size_t to = static_cast<std::size_t>(-1))
{
    to = std::min(to, a.size());
    double num = 0.0, den = 0.0;
    for (std::size_t k = from; k < to; ++k) {
        num = std::max(num, std::abs(a[k] - b[k]));
        den = std::max(den, std::abs(b[k]));
    }
    if (den == 0.0) return num;
    return num / den;
}

namespace detail {

// -du/ds by sixth-order differences, one-sided near the ends
inline std::vector<double> minus_t_dt(const HalfLineFunction& u)
{
    const auto& f = u.values();
    const std::size_t n = f.size();
    const double h = u.h();
    std::vector<double> d(n, 0.0);
    if (n < 7) throw ShapeError("identity_suite: grid too small");
    for (std::size_t j = 3; j + 3 < n; ++j)
        d[j] = (-f[j - 3] + 9.0 * f[j - 2] - 45.0 * f[j - 1] + 45.0 * f[j + 1] - 9.0 * f[j + 2] + f[j + 3]) /
               (60.0 * h);
    for (std::size_t j : {std::size_t{0}, std::size_t{1}, std::size_t{2}}) {
        std::size_t k = j;
        d[k] = (-25.0 * f[k] + 48.0 * f[k + 1] - 36.0 * f[k + 2] + 16.0 * f[k + 3] - 3.0 * f[k + 4]) / (12.0 * h);
        k = n - 1 - j;
        d[k] = (25.0 * f[k] - 48.0 * f[k - 1] + 36.0 * f[k - 2] - 16.0 * f[k - 3] + 3.0 * f[k - 4]) / (12.0 * h);
    }
    for (double& x : d) x = -x;
    return d;
}

}  // namespace detail

inline IdentityReport identity_suite(const HalfLineFunction& u, double gamma, double p = 0.5, double beta = 2.0,
                                     const std::vector<double>& tau = uniform_tau(40.0, 4096))
{
    IdentityReport rep;
    rep.gamma = gamma;
    rep.p = p;
    rep.beta = beta;
    const std::size_t m = tau.size();
    MellinSamples base = mellin_transform(u, gamma, tau);

    // (1)
    {
        MellinSamples lhs = mellin_transform(u.with_values(detail::minus_t_dt(u)), gamma, tau);
        std::vector<cplx> rhs(m);
        for (std::size_t k = 0; k < m; ++k) rhs[k] = base.z(k) * base.values[k];
        rep.derivative = sup_relative(lhs.values, rhs);
    }
    // (2)
    {
        std::vector<double> v(u.values());
        if (p != 0.0)
            for (std::size_t j = 0; j < v.size(); ++j) v[j] *= std::exp(-p * u.s(j));
        MellinSamples lhs = mellin_transform(u.with_values(std::move(v)), gamma, tau);
        const std::vector<cplx> rhs = detail::mellin_line(u, base.line() - p, tau);
        rep.shift = sup_relative(lhs.values, rhs);
    }
    // (3) d_z = -i d_tau on the line, fourth-order central differences
    {
        std::vector<double> v(u.values());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] *= u.s(j);
        MellinSamples lhs = mellin_transform(u.with_values(std::move(v)), gamma, tau);
        const double d = tau[1] - tau[0];
        std::vector<cplx> rhs(m, 0.0);
        const auto& F = base.values;
        for (std::size_t k = 2; k + 2 < m; ++k)
            rhs[k] = cplx(0.0, -1.0) * (F[k - 2] - 8.0 * F[k - 1] + 8.0 * F[k + 1] - F[k + 2]) / (12.0 * d);
        rep.logarithm = sup_relative(lhs.values, rhs, 2, m - 2);
    }
    // (4)
    {
        if (beta <= 0.0) throw DomainError("identity_suite: beta must be positive");
        std::vector<double> v(u.values());
        if (beta != 1.0) {
            if (!u.has_source()) throw PreconditionError("identity_suite: dilation needs a function built from a callable");
            for (std::size_t j = 0; j < v.size(); ++j) v[j] = u.source()(std::exp(beta * u.s(j)));
        }
        MellinSamples lhs = mellin_transform(u.with_values(std::move(v)), gamma, tau);
        std::vector<double> scaled(tau);
        for (double& t : scaled) t /= beta;
        std::vector<cplx> rhs = detail::mellin_line(u, base.line() / beta, scaled);
        for (cplx& x : rhs) x /= beta;
        rep.dilation = sup_relative(lhs.values, rhs);
    }
    return rep;
}

struct PlancherelResult {
    double lhs = 0.0;  // |u|_{L_2^gamma}
    double rhs = 0.0;  // (2 pi)^{-1/2} |M_gamma u|_{L^2(line)}
};

inline PlancherelResult plancherel_check(const HalfLineFunction& u, double gamma)
{
    PlancherelResult r;
    const std::size_t n = u.size();
    const double a = 1.0 - 2.0 * gamma;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double c = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
        s += c * std::exp(a * u.s(j)) * u.values()[j] * u.values()[j];
    }
    r.lhs = std::sqrt(s * u.h());
    bool zero = std::all_of(u.values().begin(), u.values().end(), [](double v) { return v == 0.0; });
    if (zero) return r;
    MellinSamples F = mellin_transform_auto(u, gamma);
    const std::size_t m = F.tau.size();
    double q = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double c = (k == 0 || k + 1 == m) ? 0.5 : 1.0;
        q += c * std::norm(F.values[k]);
    }
    r.rhs = std::sqrt(q * (F.tau[1] - F.tau[0]) / (2.0 * std::numbers::pi));
    return r;
}

inline void write_csv(const MellinSamples& F, const std::string& path)
{
    CsvWriter w({"tau", "re", "im"});
    for (std::size_t k = 0; k < F.tau.size(); ++k) w.row({F.tau[k], F.values[k].real(), F.values[k].imag()});
    w.save(path);
}

}  // namespace conemt
