#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "error.hpp"
#include "io.hpp"

namespace conemt {

enum class Family { polynomial, subcritical_exp, critical_exp, zero };

inline const char* to_string(Family f)
{
    switch (f) {
    case Family::polynomial: return "polynomial";
    case Family::subcritical_exp: return "subcritical_exp";
    case Family::critical_exp: return "critical_exp";
    case Family::zero: return "zero";
    }
    return "?";
}

// f(x, t) = f(t) + g(x) and F(x, t) = F(t) + g(x) t, with
//   polynomial       f = sign(t) |t|^{p-1}
//   subcritical_exp  f = c t^3 e^{|t|^gamma},  0 < gamma < 2
//   critical_exp     f = c t^3 e^{alpha0 t^2}
//   zero             f = 0
// The forcing g(r, y) is empty for every autonomous family.
struct NonlinearitySpec {
    Family family = Family::polynomial;
    double p_exp = 4.0;
    double gamma_exp = 1.5;
    double alpha0 = 1.0;
    double c = 1.0;
    std::function<double(double, double)> forcing;

    static NonlinearitySpec polynomial(double p)
    {
        if (!(p > 2.0)) throw DomainError("polynomial: p_exp must exceed 2");
        NonlinearitySpec s;
        s.family = Family::polynomial;
        s.p_exp = p;
        return s;
    }
    static NonlinearitySpec subcritical(double gamma, double c = 1.0)
    {
        if (!(gamma > 0.0 && gamma < 2.0)) throw DomainError("subcritical: gamma_exp must lie in (0, 2)");
        if (!(c > 0.0)) throw DomainError("subcritical: c must be positive");
        NonlinearitySpec s;
        s.family = Family::subcritical_exp;
        s.gamma_exp = gamma;
        s.c = c;
        return s;
    }
    static NonlinearitySpec critical(double alpha0, double c = 1.0)
    {
        if (!(alpha0 > 0.0)) throw DomainError("critical: alpha0 must be positive");
        if (!(c > 0.0)) throw DomainError("critical: c must be positive");
        NonlinearitySpec s;
        s.family = Family::critical_exp;
        s.alpha0 = alpha0;
        s.c = c;
        return s;
    }
    static NonlinearitySpec zero()
    {
        NonlinearitySpec s;
        s.family = Family::zero;
        return s;
    }

    std::string name() const
    {
        switch (family) {
        case Family::polynomial: return "polynomial(p=" + fmt(p_exp) + ")";
        case Family::subcritical_exp: return "subcritical_exp(gamma=" + fmt(gamma_exp) + ",c=" + fmt(c) + ")";
        case Family::critical_exp: return "critical_exp(alpha0=" + fmt(alpha0) + ",c=" + fmt(c) + ")";
        case Family::zero: return "zero";
        }
        return "?";
    }

    double f(double t) const
    {
        switch (family) {
        case Family::polynomial: return std::copysign(power(std::abs(t), p_exp - 1.0), t);
        case Family::subcritical_exp: return c * t * t * t * guarded_exp(std::pow(std::abs(t), gamma_exp));
        case Family::critical_exp: return c * t * t * t * guarded_exp(alpha0 * t * t);
        case Family::zero: return 0.0;
        }
        return 0.0;
    }

    double fprime(double t) const
    {
        const double a = std::abs(t);
        switch (family) {
        case Family::polynomial: return (p_exp - 1.0) * power(a, p_exp - 2.0);
        case Family::subcritical_exp: {
            const double ag = std::pow(a, gamma_exp);
            return c * guarded_exp(ag) * (3.0 * t * t + gamma_exp * ag * t * t);
        }
        case Family::critical_exp: return c * guarded_exp(alpha0 * t * t) * (3.0 * t * t + 2.0 * alpha0 * t * t * t * t);
        case Family::zero: return 0.0;
        }
        return 0.0;
    }

    double F(double t) const
    {
        const double a = std::abs(t);
        switch (family) {
        case Family::polynomial: return power(a, p_exp) / p_exp;
        case Family::subcritical_exp: {
            // c sum_k |t|^{4 + gamma k} / (k! (4 + gamma k))
            const double x = std::pow(a, gamma_exp);
            if (x > exp_guard) throw RangeError("F: exponent exceeds the overflow guard");
            if (a == 0.0) return 0.0;
            const double t4 = a * a * a * a;
            double term = 1.0, sum = 0.0;
            for (int k = 0; k < 5000; ++k) {
                if (k > 0) term *= x / k;
                const double add = term / (4.0 + gamma_exp * k);
                sum += add;
                if (k > x && add <= 1e-17 * sum) break;
            }
            return c * t4 * sum;
        }
        case Family::critical_exp: {
            // c/(2 alpha0^2) (e^x (x - 1) + 1), x = alpha0 t^2
            const double x = alpha0 * t * t;
            if (x > exp_guard) throw RangeError("F: exponent exceeds the overflow guard");
            double g;
            if (x < 0.5) {
                // sum_{k >= 2} (k - 1) x^k / k!
                double term = x * x / 2.0;
                g = 0.0;
                for (int k = 2; k < 40; ++k) {
                    g += (k - 1) * term;
                    term *= x / (k + 1);
                }
            } else {
                g = std::exp(x) * (x - 1.0) + 1.0;
            }
            return c / (2.0 * alpha0 * alpha0) * g;
        }
        case Family::zero: return 0.0;
        }
        return 0.0;
    }

    // ln f(t) for t > 0, free of overflow
    double log_f(double t) const
    {
        if (!(t > 0.0)) throw DomainError("log_f: t must be positive");
        switch (family) {
        case Family::polynomial: return (p_exp - 1.0) * std::log(t);
        case Family::subcritical_exp: return std::log(c) + 3.0 * std::log(t) + std::pow(t, gamma_exp);
        case Family::critical_exp: return std::log(c) + 3.0 * std::log(t) + alpha0 * t * t;
        case Family::zero: return -HUGE_VAL;
        }
        return 0.0;
    }

private:
    // a^e by repeated multiplication for small integer e
    static double power(double a, double e)
    {
        if (e == std::floor(e) && e >= 0.0 && e <= 16.0) {
            double r = 1.0;
            for (int k = 0; k < static_cast<int>(e); ++k) r *= a;
            return r;
        }
        return std::pow(a, e);
    }

    static double guarded_exp(double e)
    {
        if (e > exp_guard) throw RangeError("f: exponent exceeds the overflow guard");
        return std::exp(e);
    }
};

}  // namespace conemt
