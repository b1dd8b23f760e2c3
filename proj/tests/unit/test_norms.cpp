#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "conemt/norms.hpp"

using namespace conemt;

namespace {

LogGrid strip(std::size_t n, double R) { return LogGrid(ConeDomain(DomainKind::bounded_strip, R), n, n); }
LogGrid cone(std::size_t n, double R) { return LogGrid(ConeDomain(DomainKind::full_cone, R), n, n); }

GridFunction bump(const LogGrid& g, double cr, double cy, double a, double amp)
{
    return GridFunction::sample(g, [=](double r, double y) {
        double q = ((r - cr) * (r - cr) + (y - cy) * (y - cy)) / (a * a);
        return q < 1 ? amp * std::pow(1 - q, 4) : 0.0;
    });
}

// independent secant solve of int A_alpha(c u) dmu = 1 for the scale c
double secant_scale(const GridFunction& u, double alpha)
{
    auto H = [&](double c) {
        double s = 0.0;
        const LogGrid& g = u.grid();
        for (std::size_t i = 0; i < g.nr(); ++i)
            for (std::size_t j = 0; j < g.ny(); ++j) {
                double v = c * u.at(i, j);
                s += g.weight(i, j) * (std::exp(alpha * v * v) - 1.0);
            }
        return s - 1.0;
    };
    double c0 = 0.5, c1 = 1.0;
    double h0 = H(c0), h1 = H(c1);
    for (int it = 0; it < 100 && std::abs(h1) > 1e-15; ++it) {
        double c2 = c1 - h1 * (c1 - c0) / (h1 - h0);
        c0 = c1;
        h0 = h1;
        c1 = c2;
        h1 = H(c1);
    }
    return c1;
}

}  // namespace

TEST(LpGammaNorm, ClosedForms)
{
    for (double R : {1.0, 3.0}) {
        auto one = GridFunction::sample(strip(65, R), [](double, double) { return 1.0; });
        EXPECT_NEAR(lp_gamma_norm(one, {2.0, 1.0, 0}), std::sqrt(2 * R), 1e-13);
    }
    const double R = 10.0;
    auto e = GridFunction::sample(strip(1025, R), [](double r, double) { return std::exp(-r); });
    double exact = std::sqrt(1.0 - std::exp(-2 * R));
    EXPECT_NEAR(lp_gamma_norm(e, {2.0, 1.0, 0}), exact, 1e-4);
    EXPECT_THROW(lp_gamma_norm(e, {2.0, 1.0, 1}), PreconditionError);
    EXPECT_THROW(lp_gamma_norm(e, {0.5, 1.0, 0}), DomainError);
}

TEST(LpGammaNorm, WeightShift)
{
    // |u|_{L_p^gamma} = |t^{g'} u|_{L_p^{gamma + g'}}
    LogGrid g = strip(129, 5.0);
    auto u = GridFunction::sample(g, [](double r, double y) { return std::exp(-r) * (1 - y * y) * (1 + r); });
    for (double p : {1.0, 2.0, 3.5})
        for (double gp : {-0.5, 0.3, 1.0}) {
            auto tu = GridFunction::sample(g, [&](double r, double) { return std::exp(-gp * r); });
            for (std::size_t k = 0; k < tu.size(); ++k) tu[k] *= u[k];
            double a = lp_gamma_norm(u, {p, 1.0, 0});
            double b = lp_gamma_norm(tu, {p, 1.0 + gp, 0});
            EXPECT_NEAR(a, b, 1e-12 * a);
        }
}

TEST(LpGammaNorm, TriangleInequality)
{
    LogGrid g = strip(33, 4.0);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> pd(1.0, 4.0), gd(0.0, 1.5);
    for (int trial = 0; trial < 100; ++trial) {
        GridFunction u(g), v(g);
        for (std::size_t k = 0; k < g.size(); ++k) {
            u[k] = n01(rng);
            v[k] = n01(rng);
        }
        NormSpec s{pd(rng), gd(rng), 0};
        double lhs = lp_gamma_norm(u + v, s);
        double rhs = lp_gamma_norm(u, s) + lp_gamma_norm(v, s);
        EXPECT_LE(lhs, rhs * (1 + 1e-12));
    }
}

TEST(H1Norm, ZeroHomogeneityAndComponents)
{
    LogGrid g = strip(129, 4.0);
    EXPECT_EQ(h1_norm(GridFunction(g), {2.0, 1.0, 1}), 0.0);
    auto u = GridFunction::sample(g, [](double r, double y) { return std::sin(M_PI * r / 4) * (1 - y * y); });
    NormSpec s{2.0, 1.0, 1};
    double a = h1_norm(u, s);
    EXPECT_NEAR(h1_norm(-3.0 * u, s), 3.0 * a, 1e-12 * a);
    double l2 = lp_gamma_norm(u, {2.0, 1.0, 0});
    double semi = dirichlet_seminorm(u);
    EXPECT_NEAR(a * a, l2 * l2 + semi * semi, 1e-12 * a * a);
    EXPECT_THROW(h1_norm(u, {2.0, 1.0, 0}), PreconditionError);
}

TEST(H1Norm, SeminormOfSeparableFunction)
{
    // u = sin(pi r / R) sin(pi (y + 1) / 2): |grad u|^2 integrates to (pi/R)^2 R/2 + (pi/2)^2 R/2
    const double R = 4.0;
    auto u = GridFunction::sample(strip(257, R), [&](double r, double y) {
        return std::sin(M_PI * r / R) * std::sin(M_PI * (y + 1) / 2);
    });
    double exact = (M_PI / R) * (M_PI / R) * R / 2 + (M_PI / 2) * (M_PI / 2) * R / 2;
    double s2 = dirichlet_seminorm(u, DiffOrder::fourth);
    EXPECT_NEAR(s2 * s2, exact, 1e-6 * exact);
    double s = dirichlet_seminorm(u);
    EXPECT_NEAR(s * s, exact, 1e-3 * exact);
}

TEST(Luxemburg, ZeroHomogeneityAndCalibration)
{
    LogGrid g = cone(129, 3.0);
    EXPECT_EQ(luxemburg_norm(GridFunction(g), NFunction{4 * M_PI}), 0.0);
    auto u = bump(g, 0.3, -0.2, 1.0, 0.8);
    for (double alpha : {1.0, M_PI, 4 * M_PI}) {
        NFunction A{alpha};
        double n1 = luxemburg_norm(u, A);
        for (double c : {0.1, 2.0, 7.5}) EXPECT_NEAR(luxemburg_norm(c * u, A), c * n1, 1e-8 * c * n1);
        double c = secant_scale(u, alpha);
        EXPECT_NEAR(luxemburg_norm(c * u, A), 1.0, 1e-8);
    }
}

TEST(Luxemburg, MonotoneInAlpha)
{
    LogGrid g = cone(129, 3.0);
    auto u = bump(g, 0.0, 0.5, 1.5, 1.2);
    double prev = 0.0;
    for (double alpha : {0.5, 1.0, 2.0, M_PI, 2 * M_PI, 4 * M_PI, 20.0}) {
        double n = luxemburg_norm(u, NFunction{alpha});
        EXPECT_GE(n, prev);
        prev = n;
    }
}

TEST(Luxemburg, OverflowIsReported)
{
    NFunction A{4 * M_PI};
    EXPECT_THROW(A(10.0), RangeError);
    // a tall spike is still normed: overflowing trial lambdas are treated as G = +infinity
    LogGrid g = cone(65, 3.0);
    auto u = bump(g, 0.0, 0.0, 0.3, 50.0);
    double n = luxemburg_norm(u, A);
    EXPECT_GT(n, 0.0);
    EXPECT_TRUE(std::isfinite(n));
}
