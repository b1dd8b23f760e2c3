#include <gtest/gtest.h>

#include <cmath>

#include "conemt/corpus.hpp"
#include "conemt/mt_lab.hpp"
#include "conemt/rearrangement.hpp"

using namespace conemt;

namespace {

LogGrid cone(std::size_t n, double R) { return LogGrid(ConeDomain(DomainKind::full_cone, R), n, n); }

template <class G>
double grid_integral(const GridFunction& u, G g)
{
    GridFunction v(u.grid());
    for (std::size_t k = 0; k < u.size(); ++k) v[k] = g(u[k]);
    return integrate(v);
}

}  // namespace

TEST(Rearrange, RejectsNegativeAndStrip)
{
    auto g = cone(33, 2.0);
    auto u = GridFunction::sample(g, [](double r, double) { return r; });
    EXPECT_THROW(rearrange(u), PreconditionError);
    LogGrid s(ConeDomain(DomainKind::bounded_strip, 2.0), 33, 33);
    EXPECT_THROW(rearrange(GridFunction(s)), PreconditionError);
}

TEST(Rearrange, IndicatorBecomesCentredBall)
{
    auto g = cone(129, 3.0);
    // indicator of an off-centre rectangle of interior nodes (all full weights)
    auto u = GridFunction::sample(g, [](double r, double y) {
        return (r > 0.3 && r < 1.9 && y > -2.1 && y < -0.2) ? 1.0 : 0.0;
    });
    double m = integrate(u);
    auto res = rearrange(u);
    EXPECT_NEAR(res.profile.support(), std::sqrt(m / M_PI), 1e-14);
    for (std::size_t k = 0; k + 1 < res.profile.size(); ++k) EXPECT_EQ(res.profile.values()[k], 1.0);
    EXPECT_EQ(integrate(res.grid), m);
}

TEST(Rearrange, RadialDecreasingIsFixed)
{
    auto g = cone(129, 3.0);
    auto u = GridFunction::sample(g, [](double r, double y) { return quartic_bump(r, y, 0, 0, 2.0, 1.3); });
    auto res = rearrange(u);
    for (std::size_t k = 0; k < u.size(); ++k) EXPECT_NEAR(res.grid[k], u[k], 1e-10);
}

TEST(Rearrange, Equimeasurability)
{
    auto g = cone(513, 4.0);
    auto corpus = bump_corpus(6, 11);
    for (const auto& spec : corpus) {
        auto u = sample_bumps(g, spec);
        auto res = rearrange(u);
        auto check = [&](auto G) {
            double a = grid_integral(u, G), b = profile_integral(res.profile, G);
            EXPECT_NEAR(b, a, 1e-6 * a);
            EXPECT_NEAR(grid_integral(res.grid, G), a, 1e-13 * a);
        };
        check([](double s) { return s * s; });
        check([](double s) { return s * s * s * s; });
        check([](double s) { return std::expm1(s * s); });
        // monotone by construction
        EXPECT_NO_THROW(res.profile.validate());
    }
}

TEST(PolyaSzego, HexagonalPyramidClosedForm)
{
    // u = 1 - max(|r|, |y|, |r - y|)/a is exactly P1 on the (i,j)-(i+1,j+1) split when a is a
    // multiple of h. Level sets are hexagons of area 3 a^2 (1 - t)^2: energy 4, rearranged energy pi.
    auto g = cone(129, 3.0);
    for (double a : {32 * g.hr(), 48 * g.hr()}) {
        auto u = GridFunction::sample(g, [a](double r, double y) {
            return std::max(0.0, 1.0 - std::max({std::abs(r), std::abs(y), std::abs(r - y)}) / a);
        });
        auto t = polya_szego_terms(u);
        EXPECT_NEAR(t.energy, 4.0, 1e-12);
        EXPECT_NEAR(t.energy_star, M_PI, 1e-9);
    }
}

TEST(PolyaSzego, RadialAndTranslated)
{
    auto g = cone(257, 4.0);
    auto centred = GridFunction::sample(g, [](double r, double y) { return quartic_bump(r, y, 0, 0, 1.5, 1.0); });
    auto shifted = GridFunction::sample(g, [](double r, double y) { return quartic_bump(r, y, 1.0, -0.5, 1.5, 1.0); });
    auto tc = polya_szego_terms(centred), ts = polya_szego_terms(shifted);
    // a radial function loses only its lattice anisotropy
    EXPECT_GE(tc.gap(), -1e-12 * tc.energy);
    EXPECT_LT(tc.gap(), 1e-3 * tc.energy);
    EXPECT_NEAR(tc.gap(), ts.gap(), 1e-4);
    EXPECT_NEAR(tc.energy, ts.energy, 1e-4);
}

TEST(PolyaSzego, CorpusGapNonnegative)
{
    for (std::size_t n : {129u, 257u}) {
        auto g = cone(n, 4.0);
        for (const auto& spec : bump_corpus(5, 5)) {
            auto t = polya_szego_terms(sample_bumps(g, spec));
            EXPECT_GE(t.gap(), -1e-12 * t.energy);
        }
    }
    EXPECT_EQ(polya_szego_gap(GridFunction(cone(17, 1.0))), 0.0);
}

TEST(ReduceTo1d, MoserFunctionIsTheBlowupProfile)
{
    // M2 with d = R reduces to w = min(t, 2 ln 2) / sqrt(2 ln 2)
    const double d = 1.3;
    auto f = moser_function(d);
    auto prof = RadialProfile::sample(f, 400);
    auto w = reduce_to_1d(prof, d, {20001, 6.0});
    const double t1 = 2 * std::log(2.0);
    for (std::size_t k = 0; k < w.size(); k += 97) {
        double t = w.grid()[k];
        EXPECT_NEAR(w.values()[k], std::min(t, t1) / std::sqrt(t1), 2e-4);
    }
    // both change-of-variable identities
    EXPECT_NEAR(admissibility_integral(w, 2.0), dirichlet_energy(f), 1e-3);
    for (double alpha : {M_PI, 2 * M_PI, 4 * M_PI}) {
        double lhs = one_d_functional(w, alpha / alpha2, 2.0);
        double rhs = (mt_integral(f, alpha, 1.0) + M_PI * d * d) / (M_PI * d * d);
        EXPECT_NEAR(lhs, rhs, 1e-3 * rhs);
    }
    EXPECT_EQ(w.max_value(), std::sqrt(4 * M_PI) * prof.max_value());
}

TEST(ReduceTo1d, ZeroAndSupport)
{
    RadialProfile zero(RadialVariable::rho, {0.0, 1.0}, {0.0, 0.0});
    auto w = reduce_to_1d(zero, 1.0, {11, 5.0});
    for (double v : w.values()) EXPECT_EQ(v, 0.0);
    auto prof = RadialProfile::sample(moser_function(2.0), 50);
    EXPECT_THROW(reduce_to_1d(prof, 1.5), PreconditionError);
}

TEST(ReduceTo1d, SmoothBumpEnergy)
{
    // amp (1 - rho^2/a^2)^4 has energy 64 pi amp^2 B(2, 7) = 64 pi amp^2 / 56 for any a
    const double a = 1.5, amp = 0.8;
    RadialFunction f;
    f.value = [=](double rho) { return rho < a ? amp * std::pow(1.0 - rho * rho / (a * a), 4) : 0.0; };
    f.slope = [=](double rho) { return rho < a ? -8.0 * amp * rho / (a * a) * std::pow(1.0 - rho * rho / (a * a), 3) : 0.0; };
    f.breakpoints = {0.0, a};
    const double exact = 64.0 * M_PI * amp * amp / 56.0;
    EXPECT_NEAR(dirichlet_energy(f), exact, 1e-12 * exact);
    auto prof = RadialProfile::sample(f, 2000);
    EXPECT_NEAR(profile_dirichlet_energy(prof), exact, 1e-5 * exact);
    auto w = reduce_to_1d(prof, 1.6, {20001, 16.0});
    EXPECT_NEAR(admissibility_integral(w, 2.0), exact, 1e-3 * exact);
}
