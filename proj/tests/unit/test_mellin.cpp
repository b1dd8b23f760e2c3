#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "conemt/corpus.hpp"
#include "conemt/mellin.hpp"

using namespace conemt;

namespace {

constexpr double kSmax = 10.0;
constexpr std::size_t kN = 4001;

HalfLineFunction sampled(const std::function<double(double)>& u)
{
    return HalfLineFunction::from_callable(u, kSmax, kN);
}

// int e^{z s} e^{-(s - m)^2 / w^2} ds = w sqrt(pi) e^{z m + w^2 z^2 / 4}
cplx gaussian_closed_form(cplx z, double m = 0.0, double w = 1.0)
{
    return w * std::sqrt(M_PI) * std::exp(z * m + w * w * z * z / 4.0);
}

double sup_rel(const MellinSamples& F, const std::function<cplx(cplx)>& exact)
{
    std::vector<cplx> ref(F.tau.size());
    for (std::size_t k = 0; k < ref.size(); ++k) ref[k] = exact(F.z(k));
    return sup_relative(F.values, ref);
}

}  // namespace

TEST(MellinTransform, GaussianClosedForms)
{
    auto corpus = mellin_corpus();
    auto tau = uniform_tau(40.0, 4096);
    for (double gamma : {0.5, 1.0, -0.25}) {
        EXPECT_LE(sup_rel(mellin_transform(sampled(corpus[0].u), gamma, tau),
                          [](cplx z) { return gaussian_closed_form(z); }), 1e-6);
        EXPECT_LE(sup_rel(mellin_transform(sampled(corpus[1].u), gamma, tau),
                          [](cplx z) { return gaussian_closed_form(z, 0.7, 1.5); }), 1e-6);
        EXPECT_LE(sup_rel(mellin_transform(sampled(corpus[2].u), gamma, tau),
                          [](cplx z) { return gaussian_closed_form(z + 1.0); }), 1e-6);
    }
}

TEST(MellinTransform, MollifiedIndicatorClosedForm)
{
    // ((b^z - a^z) / z) e^{sigma^2 z^2 / 4}
    struct Case { double a, b, sigma; };
    auto corpus = mellin_corpus();
    Case cases[] = {{0.5, 2.0, 0.5}, {1.0, 4.0, 0.4}, {0.2, 0.9, 0.3}};
    auto tau = uniform_tau(40.0, 4096);
    for (int k = 0; k < 3; ++k) {
        Case c = cases[k];
        auto F = mellin_transform(sampled(corpus[3 + k].u), 0.5, tau);
        EXPECT_LE(sup_rel(F, [&](cplx z) {
                      return (std::pow(c.b, z) - std::pow(c.a, z)) / z * std::exp(c.sigma * c.sigma * z * z / 4.0);
                  }), 1e-6) << corpus[3 + k].name;
    }
}

TEST(MellinTransform, RawIndicator)
{
    // endpoints on nodes and valued 1/2, so the rule is the composite trapezoid on [ln a, ln b]
    const double h = 2 * kSmax / (kN - 1);
    const double la = -200 * h, lb = 300 * h;
    std::vector<double> v(kN, 0.0);
    HalfLineFunction grid(kSmax, kN, v);
    for (std::size_t j = 0; j < kN; ++j) {
        double s = grid.s(j);
        if (std::abs(s - la) < h / 4 || std::abs(s - lb) < h / 4) v[j] = 0.5;
        else if (s > la && s < lb) v[j] = 1.0;
    }
    auto F = mellin_transform(grid.with_values(v), 0.5, uniform_tau(40.0, 4096));
    double a = std::exp(la), b = std::exp(lb);
    EXPECT_LE(sup_rel(F, [&](cplx z) { return (std::pow(b, z) - std::pow(a, z)) / z; }), 1e-2);
}

TEST(MellinTransform, ZeroAndTruncationFlag)
{
    auto zero = sampled([](double) { return 0.0; });
    auto F = mellin_transform(zero, 0.5, uniform_tau(10.0, 64));
    for (const cplx& v : F.values) EXPECT_EQ(std::abs(v), 0.0);
    EXPECT_FALSE(F.truncated);
    auto one = sampled([](double) { return 1.0; });
    EXPECT_TRUE(mellin_transform(one, 0.5, uniform_tau(10.0, 64)).truncated);
    EXPECT_FALSE(mellin_transform(sampled(mellin_corpus()[0].u), 0.5, uniform_tau(10.0, 64)).truncated);
}

TEST(MellinTransform, Linearity)
{
    auto corpus = mellin_corpus();
    auto tau = uniform_tau(20.0, 257);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_int_distribution<std::size_t> pick(0, corpus.size() - 1);
    for (int trial = 0; trial < 10; ++trial) {
        auto u = sampled(corpus[pick(rng)].u), v = sampled(corpus[pick(rng)].u);
        double a = coef(rng), b = coef(rng);
        std::vector<double> w(kN);
        for (std::size_t j = 0; j < kN; ++j) w[j] = a * u.values()[j] + b * v.values()[j];
        auto Fw = mellin_transform(u.with_values(w), 0.5, tau);
        auto Fu = mellin_transform(u, 0.5, tau), Fv = mellin_transform(v, 0.5, tau);
        std::vector<cplx> comb(tau.size());
        for (std::size_t k = 0; k < tau.size(); ++k) comb[k] = a * Fu.values[k] + b * Fv.values[k];
        EXPECT_LE(sup_relative(Fw.values, comb), 1e-13);
    }
}

TEST(MellinTransform, LineShiftConsistency)
{
    auto tau = uniform_tau(40.0, 1024);
    for (const auto& c : mellin_corpus())
        for (double delta : {-0.5, 0.5, 1.0}) {
            auto u = sampled(c.u);
            auto tu = sampled([&](double t) { return std::pow(t, delta) * c.u(t); });
            auto F = mellin_transform(u, 0.5, tau), G = mellin_transform(tu, 0.5 + delta, tau);
            EXPECT_LE(sup_relative(G.values, F.values), 1e-6) << c.name << " delta " << delta;
        }
}

TEST(MellinInverse, RoundTrips)
{
    auto corpus = mellin_corpus();
    for (double gamma : {0.5, -0.5}) {
        auto u = sampled(corpus[0].u);
        auto back = mellin_inverse(mellin_transform_auto(u, gamma), 8.0, 1601);
        double err = 0.0;
        for (std::size_t j = 0; j < back.size(); ++j)
            err = std::max(err, std::abs(back.values()[j] - corpus[0].u(back.t(j))));
        EXPECT_LE(err, 1e-6) << "gamma " << gamma;
    }
    // t e^{-(ln t)^2} on the line shifted by one
    auto u = sampled(corpus[2].u);
    for (double gamma : {0.5, 1.5}) {
        auto back = mellin_inverse(mellin_transform_auto(u, gamma), 8.0, 1601);
        double err = 0.0;
        for (std::size_t j = 0; j < back.size(); ++j)
            err = std::max(err, std::abs(back.values()[j] - corpus[2].u(back.t(j))));
        EXPECT_LE(err, 1e-6) << "gamma " << gamma;
    }
}

TEST(MellinInverse, ZeroAndAliasing)
{
    MellinSamples F;
    F.gamma = 0.5;
    F.tau = uniform_tau(10.0, 101);
    F.values.assign(101, cplx(0.0, 0.0));
    auto z = mellin_inverse(F, 5.0, 101);
    for (double v : z.values()) EXPECT_EQ(v, 0.0);
    // a window that cuts the spectrum off is refused
    auto G = mellin_transform(sampled(mellin_corpus()[3].u), 0.5, uniform_tau(2.0, 101));
    EXPECT_THROW(mellin_inverse(G, 5.0, 101), NumericError);
}

TEST(IdentitySuite, CorpusResiduals)
{
    for (const auto& c : mellin_corpus())
        for (double gamma : {0.5, 1.0}) {
            auto rep = identity_suite(sampled(c.u), gamma, 0.5, 2.0);
            EXPECT_LE(rep.derivative, 1e-5) << c.name;
            EXPECT_LE(rep.shift, 1e-5) << c.name;
            EXPECT_LE(rep.logarithm, 1e-5) << c.name;
            EXPECT_LE(rep.dilation, 1e-5) << c.name;
        }
}

TEST(IdentitySuite, TrivialParametersAreExact)
{
    auto rep = identity_suite(sampled(mellin_corpus()[0].u), 0.5, 0.0, 1.0);
    EXPECT_EQ(rep.shift, 0.0);
    EXPECT_EQ(rep.dilation, 0.0);
}

TEST(Plancherel, Corpus)
{
    for (const auto& c : mellin_corpus())
        for (double gamma : {0.5, 1.0}) {
            auto r = plancherel_check(sampled(c.u), gamma);
            EXPECT_NEAR(r.lhs, r.rhs, 1e-5 * r.lhs) << c.name;
        }
    auto z = plancherel_check(sampled([](double) { return 0.0; }), 0.5);
    EXPECT_EQ(z.lhs, 0.0);
    EXPECT_EQ(z.rhs, 0.0);
}

TEST(Plancherel, DilationRescaling)
{
    // v(t) = u(t^2): |v|_gamma^2 = |u|_{gamma'}^2 / 2 with 1 - 2 gamma' = (1 - 2 gamma) / 2
    auto u = mellin_corpus()[0].u;
    for (double gamma : {0.5, 1.0, 0.0}) {
        double gp = 0.5 - (1 - 2 * gamma) / 4;
        auto rv = plancherel_check(sampled([&](double t) { return u(t * t); }), gamma);
        auto ru = plancherel_check(sampled(u), gp);
        EXPECT_NEAR(rv.lhs * rv.lhs, ru.lhs * ru.lhs / 2, 1e-5 * rv.lhs * rv.lhs);
        EXPECT_NEAR(rv.rhs * rv.rhs, ru.rhs * ru.rhs / 2, 1e-5 * rv.rhs * rv.rhs);
    }
}

TEST(MellinSamples, CsvLayout)
{
    auto F = mellin_transform(sampled(mellin_corpus()[0].u), 0.5, uniform_tau(1.0, 3));
    std::string path = testing::TempDir() + "mellin.csv";
    write_csv(F, path);
    std::ifstream f(path);
    std::string header, row;
    std::getline(f, header);
    std::getline(f, row);
    EXPECT_EQ(header, "tau,re,im");
    EXPECT_EQ(row.substr(0, 3), "-1,");
}
