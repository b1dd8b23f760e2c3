#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cone_domain.hpp"

namespace conemt {

struct HalfLineCase {
    std::string name;
    std::function<double(double)> u;  // u(t), t > 0
};

// Gaussian-class functions of s = ln t, all with super-exponentially decaying spectra.
inline std::vector<HalfLineCase> mellin_corpus()
{
    auto mollified = [](double a, double b, double sigma) {
        return [=](double t) {
            double s = std::log(t);
            return 0.5 * (std::erf((s - std::log(a)) / sigma) - std::erf((s - std::log(b)) / sigma));
        };
    };
    return {
        {"gaussian", [](double t) { double s = std::log(t); return std::exp(-s * s); }},
        {"gaussian_shifted", [](double t) { double s = std::log(t) - 0.7; return std::exp(-s * s / 2.25); }},
        {"t_gaussian", [](double t) { double s = std::log(t); return t * std::exp(-s * s); }},
        {"mollified_indicator_1", mollified(0.5, 2.0, 0.5)},
        {"mollified_indicator_2", mollified(1.0, 4.0, 0.4)},
        {"mollified_indicator_3", mollified(0.2, 0.9, 0.3)},
    };
}

// A(1 - q)^4 on the log-disk of radius a about (cr, cy), q = |x - c|^2 / a^2 (C^3, compact).
inline double quartic_bump(double r, double y, double cr, double cy, double a, double amp)
{
    double q = ((r - cr) * (r - cr) + (y - cy) * (y - cy)) / (a * a);
    if (q >= 1.0) return 0.0;
    double w = 1.0 - q;
    return amp * w * w * w * w;
}

struct BumpSpec {
    double cr, cy, radius, amplitude;
};

// Nonnegative sums of one to three quartic bumps on the full cone, deterministic in seed.
inline std::vector<std::vector<BumpSpec>> bump_corpus(std::size_t count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> centre(-1.5, 1.5), radius(0.5, 1.5), amp(0.3, 1.5);
    std::uniform_int_distribution<int> parts(1, 3);
    std::vector<std::vector<BumpSpec>> out(count);
    for (auto& f : out) {
        int n = parts(rng);
        for (int k = 0; k < n; ++k) {
            BumpSpec b;
            b.cr = centre(rng);
            b.cy = centre(rng);
            b.radius = radius(rng);
            b.amplitude = amp(rng);
            f.push_back(b);
        }
    }
    return out;
}

inline GridFunction sample_bumps(const LogGrid& g, const std::vector<BumpSpec>& bumps)
{
    return GridFunction::sample(
        g,
        [&](double r, double y) {
            double v = 0.0;
            for (const auto& b : bumps) v += quartic_bump(r, y, b.cr, b.cy, b.radius, b.amplitude);
            return v;
        },
        true);
}

}  // namespace conemt
