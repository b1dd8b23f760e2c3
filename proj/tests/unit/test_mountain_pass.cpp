#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "conemt/corpus.hpp"
#include "conemt/mountain_pass.hpp"

using namespace conemt;

namespace {

LogGrid strip(std::size_t n, double R) { return LogGrid(ConeDomain(DomainKind::bounded_strip, R), n, n); }

std::vector<NonlinearitySpec> shipped()
{
    return {NonlinearitySpec::polynomial(4.0), NonlinearitySpec::subcritical(1.5), NonlinearitySpec::critical(0.5)};
}

double weighted_sum(const LogGrid& g, const GridFunction& u, double (*h)(double))
{
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < g.nr(); ++i)
        for (std::size_t j = 1; j + 1 < g.ny(); ++j) s += h(u.at(i, j));
    return s * g.hr() * g.hy();
}

double fourth(double x) { return x * x * x * x; }

GridFunction bump(const LogGrid& g, double amp)
{
    return GridFunction::sample(g, [&](double r, double y) { return quartic_bump(r, y, 2.0, 0.1, 0.8, amp); }, true);
}

// forcing that reproduces a nodal array exactly at the grid nodes
std::function<double(double, double)> nodal_forcing(const LogGrid& g, GridFunction values)
{
    return [g, values](double r, double y) {
        const auto i = static_cast<std::size_t>(std::lround((r - g.domain().r_lo()) / g.hr()));
        const auto j = static_cast<std::size_t>(std::lround((y - g.domain().y_lo()) / g.hy()));
        return values.at(i, j);
    };
}

}  // namespace

TEST(Nonlinearity, PrimitiveMatchesQuadrature)
{
    for (const auto& s : shipped())
        for (double t : {-1.7, -0.3, 1e-4, 0.2, 0.9, 1.6, 2.4}) {
            // Simpson on [0, t] with 2000 panels
            const int n = 2000;
            double acc = s.f(0.0) + s.f(t);
            for (int k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * s.f(t * k / n);
            const double simpson = acc * t / (3.0 * n);
            EXPECT_NEAR(s.F(t), simpson, 1e-10 * std::max(1.0, std::abs(simpson))) << s.name() << " " << t;
            const double e = 1e-6 * std::max(1.0, std::abs(t));
            EXPECT_NEAR(s.fprime(t), (s.f(t + e) - s.f(t - e)) / (2 * e), 1e-6 * std::max(1.0, std::abs(s.fprime(t))))
                << s.name();
        }
    EXPECT_THROW(NonlinearitySpec::critical(1.0).F(30.0), RangeError);
    EXPECT_THROW(NonlinearitySpec::critical(1.0).f(30.0), RangeError);
    EXPECT_THROW(NonlinearitySpec::polynomial(2.0), DomainError);
    EXPECT_THROW(NonlinearitySpec::subcritical(2.0), DomainError);
}

TEST(Energy, QuarticClosedForm)
{
    auto g = strip(65, 4.0);
    DiscreteOperator A(g);
    const auto spec = NonlinearitySpec::polynomial(4.0);
    auto u = bump(g, 1.0);
    const double a = A.energy(u), b = weighted_sum(g, u, fourth);
    for (double t : {0.0, 0.5, 2.0, 7.0})
        EXPECT_NEAR(energy(A, spec, t * u), 0.5 * t * t * a - 0.25 * t * t * t * t * b, 1e-12 * (1 + t * t * t * t * b));
}

TEST(Energy, UnboundedBelowAlongRays)
{
    auto g = strip(33, 4.0);
    DiscreteOperator A(g);
    auto u = bump(g, 1.0);
    for (const auto& s : shipped()) {
        double prev = 0.0, t = 1.0, last = 0.0;
        bool went_down = false;
        try {
            for (; t < 1e4; t *= 2.0) {
                last = energy(A, s, t * u);
                if (last < prev) went_down = true;
                prev = last;
            }
        } catch (const RangeError&) {
        }
        EXPECT_TRUE(went_down) << s.name();
        EXPECT_LT(last, -1.0) << s.name();
    }
}

TEST(Gradient, FiniteDifferences)
{
    auto g = strip(33, 4.0);
    DiscreteOperator A(g);
    std::mt19937_64 rng(3);
    for (auto s : shipped()) {
        for (int trial = 0; trial < 3; ++trial) {
            auto u = random_direction(g, rng), v = random_direction(g, rng);
            u *= 1.2 / u.max_abs();
            const double eps = 1e-5;
            const double fd = (energy(A, s, u + eps * v) - energy(A, s, u - eps * v)) / (2 * eps);
            const double an = A.inner(gradient(A, s, u), v);
            EXPECT_NEAR(fd, an, 1e-6 * std::max(1.0, std::abs(an))) << s.name();
        }
    }
    // and with forcing
    auto s = NonlinearitySpec::polynomial(3.0);
    s.forcing = [](double r, double y) { return std::sin(r) * (1 - y * y); };
    auto u = bump(g, 0.7), v = bump(g, 0.3);
    const double fd = (energy(A, s, u + 1e-5 * v) - energy(A, s, u - 1e-5 * v)) / 2e-5;
    EXPECT_NEAR(fd, A.inner(gradient(A, s, u), v), 1e-7);
}

TEST(Gradient, EigenfunctionResidual)
{
    auto g = strip(65, 4.0);
    DiscreteOperator A(g);
    auto eig = first_eigenvalue(A);
    const auto& v = eig.eigenfunction;
    auto G = gradient(A, NonlinearitySpec::polynomial(4.0), v);
    for (std::size_t i = 1; i + 1 < g.nr(); ++i)
        for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
            const double x = v.at(i, j);
            EXPECT_NEAR(G.at(i, j), eig.lambda1 * x - x * x * x, 1e-7);
        }
}

TEST(Conditions, ShippedFamilies)
{
    const double lam = separable_eigenvalue(ConeDomain(DomainKind::bounded_strip, 4.0));
    for (const auto& s : shipped()) {
        auto rep = validate_conditions(s, lam);
        EXPECT_TRUE(rep.f2_pass) << s.name();
        EXPECT_TRUE(rep.f3_pass) << s.name();
        EXPECT_TRUE(rep.f4_pass) << s.name();
        EXPECT_LT(rep.f4_value, 1e-5) << s.name();
        EXPECT_FALSE(rep.f6_note.empty());
    }
    auto crit = validate_conditions(NonlinearitySpec::critical(0.5), lam);
    EXPECT_EQ(crit.growth_class, "critical");
    EXPECT_NEAR(crit.alpha_estimate, 0.5, 0.01);
    EXPECT_TRUE(crit.f5_applicable);
    EXPECT_TRUE(crit.f5_pass);
    EXPECT_NEAR(crit.f5_lhs, 30.0 * 30.0 * 30.0 * 30.0, 1e-6 * 810000.0);
    EXPECT_EQ(validate_conditions(NonlinearitySpec::subcritical(1.5), lam).growth_class, "subcritical");
    EXPECT_EQ(validate_conditions(NonlinearitySpec::polynomial(4.0), lam).growth_class, "subcritical");
    EXPECT_FALSE(validate_conditions(NonlinearitySpec::zero(), lam).f2_pass);
    // f = lam t near zero breaks (f4): F = t^2 sized by a large constant
    auto big = NonlinearitySpec::critical(0.5, 1e12);
    EXPECT_FALSE(validate_conditions(big, lam).f4_pass);
}

TEST(Geometry, SphereOfPositiveEnergy)
{
    auto g = strip(33, 4.0);
    DiscreteOperator A(g);
    for (const auto& s : shipped()) {
        auto rep = check_geometry(A, s, 7);
        EXPECT_GT(rep.delta, 0.0) << s.name();
        EXPECT_GT(rep.rho, 0.0);
        EXPECT_LE(rep.delta, 0.5 * rep.rho * rep.rho);
        EXPECT_EQ(rep.directions, 50u);
    }
    auto a = check_geometry(A, shipped()[0], 7), b = check_geometry(A, shipped()[0], 7);
    EXPECT_EQ(a.delta, b.delta);
}

TEST(Endpoint, QuarticOracle)
{
    auto g = strip(33, 4.0);
    DiscreteOperator A(g);
    auto v = bump(g, 1.0);
    v *= 1.0 / energy_norm(A, v);
    const double S = weighted_sum(g, v, fourth);
    // I(t v) = t^2/2 - S t^4/4; first power of two with I <= -1
    double t = 1.0;
    while (0.5 * t * t - 0.25 * S * t * t * t * t > -1.0) t *= 2.0;
    auto end = find_endpoint(A, NonlinearitySpec::polynomial(4.0), v);
    EXPECT_EQ(end.t, t);
    EXPECT_LE(end.energy, -1.0);
    EXPECT_NEAR(end.energy, 0.5 * t * t - 0.25 * S * t * t * t * t, 1e-9 * std::abs(end.energy));
    EXPECT_THROW(find_endpoint(A, NonlinearitySpec::zero(), v), SolverError);
    EXPECT_THROW(find_endpoint(A, NonlinearitySpec::polynomial(4.0), -1.0 * v), PreconditionError);
    EXPECT_THROW(find_endpoint(A, NonlinearitySpec::polynomial(4.0), GridFunction(g)), PreconditionError);
    // the critical family overflows before some doublings; bisection still lands below -1
    auto c = find_endpoint(A, NonlinearitySpec::critical(0.5), v);
    EXPECT_LE(c.energy, -1.0);
}

TEST(MountainPass, PolynomialSolution)
{
    auto g = strip(33, 4.0);
    DiscreteOperator A(g);
    const auto spec = NonlinearitySpec::polynomial(4.0);
    MPOptions opt;
    opt.tol = 1e-6;
    auto res = mp_solve(A, spec, opt);
    EXPECT_LE(res.grad_norm, 1e-6);
    EXPECT_GE(res.level, res.geometry.delta);
    EXPECT_LT(res.level, 0.5 * res.endpoint_t * res.endpoint_t);
    // Nehari identity at a critical point: <A u, u> = int f(u) u
    const double nehari = weighted_sum(g, res.u_star, fourth);
    EXPECT_NEAR(A.energy(res.u_star), nehari, 1e-5 * nehari);
    // level = (1/2 - 1/4) int u^4 at a critical point of the quartic functional
    EXPECT_NEAR(res.level, 0.25 * nehari, 1e-5 * res.level);
    for (std::size_t k = 1; k < res.history.size(); ++k)
        EXPECT_LE(res.history[k].path_max, res.history[k - 1].path_max + 1e-14);
    double mn = 0.0;
    for (double x : res.u_star.values()) mn = std::min(mn, x);
    EXPECT_GE(mn, -1e-6 * res.u_star.max_abs());

    auto nr = newton_refine(A, spec, res.u_star);
    EXPECT_TRUE(nr.converged);
    EXPECT_FALSE(nr.trivial);
    EXPECT_LE(nr.residual, 1e-9);
    EXPECT_NEAR(energy(A, spec, nr.u), res.level, 1e-6 * res.level);
    EXPECT_LE(energy_norm(A, nr.u - res.u_star), 1e-4 * energy_norm(A, nr.u));

    auto j = res.to_json(A, spec);
    EXPECT_EQ(j["spec"], spec.name());
    EXPECT_DOUBLE_EQ(j["level"].get<double>(), res.level);
}

TEST(MountainPass, ShippedFamiliesConverge)
{
    auto g = strip(33, 4.0);
    DiscreteOperator A(g);
    for (const auto& s : {NonlinearitySpec::subcritical(1.5), NonlinearitySpec::critical(0.5)}) {
        auto res = mp_solve(A, s);
        EXPECT_LE(res.grad_norm, 1e-6) << s.name();
        EXPECT_GT(res.level, 0.0) << s.name();
        EXPECT_NEAR(A.energy(res.u_star) - 2.0 * potential(A, s, res.u_star), 2.0 * res.level, 1e-12 * res.level);
        auto nr = newton_refine(A, s, res.u_star);
        EXPECT_TRUE(nr.converged) << s.name();
        EXPECT_NEAR(energy(A, s, nr.u), res.level, 1e-6 * res.level) << s.name();
    }
}

TEST(MountainPass, RejectsZeroFamily)
{
    auto g = strip(17, 4.0);
    DiscreteOperator A(g);
    EXPECT_THROW(mp_solve(A, NonlinearitySpec::zero()), PreconditionError);
    MPOptions bad;
    bad.path_points = 2;
    EXPECT_THROW(mp_solve(A, NonlinearitySpec::polynomial(4.0), bad), DomainError);
}

TEST(Newton, TrivialFromZero)
{
    auto g = strip(33, 4.0);
    DiscreteOperator A(g);
    auto nr = newton_refine(A, NonlinearitySpec::polynomial(4.0), GridFunction(g));
    EXPECT_TRUE(nr.converged);
    EXPECT_TRUE(nr.trivial);
    EXPECT_EQ(nr.iterations, 0u);
}

TEST(Newton, ManufacturedForcing)
{
    auto g = strip(33, 4.0);
    DiscreteOperator A(g);
    auto exact = bump(g, 1.3);
    // zero family: A u = g
    auto lin = NonlinearitySpec::zero();
    lin.forcing = nodal_forcing(g, A.apply(exact));
    auto a = newton_refine(A, lin, GridFunction(g));
    EXPECT_TRUE(a.converged);
    EXPECT_LE(a.iterations, 2u);
    EXPECT_LE((a.u - exact).max_abs(), 1e-9);
    // nonlinear: A u - u^3 = g with g built from the exact solution
    auto cub = NonlinearitySpec::polynomial(4.0);
    GridFunction rhs = A.apply(exact);
    for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] -= exact[k] * exact[k] * exact[k];
    cub.forcing = nodal_forcing(g, rhs);
    auto b = newton_refine(A, cub, 0.5 * exact);
    EXPECT_TRUE(b.converged);
    EXPECT_LE((b.u - exact).max_abs(), 1e-9);
    for (std::size_t k = 1; k < b.residual_history.size(); ++k)
        EXPECT_LT(b.residual_history[k], b.residual_history[k - 1]);
}
