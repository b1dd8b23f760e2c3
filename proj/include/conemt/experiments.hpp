#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cone_domain.hpp"
#include "cone_operator.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "io.hpp"
#include "mellin.hpp"
#include "mountain_pass.hpp"
#include "mt_lab.hpp"
#include "norms.hpp"
#include "radial.hpp"
#include "rearrangement.hpp"

namespace conemt {

using json = nlohmann::json;

inline const std::vector<std::string>& experiment_names()
{
    static const std::vector<std::string> names{"mellin-check",     "mt-sharpness", "mt-subcritical",
                                                "one-d-reduction",  "scale-invariance", "polya-szego",
                                                "eigen",            "mp-solve",     "f5-constant"};
    return names;
}

// The experiment that reproduces acceptance criterion n (1..12).
inline std::string experiment_for(int criterion)
{
    switch (criterion) {
    case 1: return "mellin-check";
    case 2: return "mt-sharpness";
    case 3:
    case 6: return "one-d-reduction";
    case 4: return "scale-invariance";
    case 5: return "polya-szego";
    case 7: return "eigen";
    case 8: return "mt-subcritical";
    case 9:
    case 10:
    case 12: return "mp-solve";
    case 11: return "f5-constant";
    }
    throw UsageError("no acceptance criterion " + std::to_string(criterion));
}

struct GridConfig {
    std::size_t nr = 257;
    std::size_t ny = 257;
    double r_max = 4.0;
};

inline GridConfig default_grid(const std::string& experiment)
{
    GridConfig g;
    if (experiment == "scale-invariance") g.r_max = 2.5;
    return g;
}

struct ExperimentConfig {
    std::string experiment;
    GridConfig grid;
    json params = json::object();
    std::string output_dir;
    std::uint64_t seed = 2024;

    // Rejects unknown keys, wrong types and non-positive grid fields with UsageError.
    static ExperimentConfig from_json(const json& j)
    {
        if (!j.is_object()) throw UsageError("config: expected a JSON object");
        if (j.empty()) throw UsageError("config: empty configuration");
        for (const auto& [k, v] : j.items())
            if (k != "experiment" && k != "grid" && k != "params" && k != "output_dir" && k != "seed")
                throw UsageError("config: unknown key '" + k + "'");
        if (!j.contains("experiment") || !j["experiment"].is_string())
            throw UsageError("config: 'experiment' is required");
        ExperimentConfig c;
        c.experiment = j["experiment"].get<std::string>();
        const auto& names = experiment_names();
        if (std::find(names.begin(), names.end(), c.experiment) == names.end())
            throw UsageError("config: unknown experiment '" + c.experiment + "'");
        c.grid = default_grid(c.experiment);
        if (j.contains("grid")) {
            const json& g = j["grid"];
            if (!g.is_object()) throw UsageError("config: 'grid' must be an object");
            for (const auto& [k, v] : g.items()) {
                if (k == "nr" || k == "ny") {
                    if (!v.is_number_integer() || v.get<long long>() < 3)
                        throw UsageError("config: grid." + k + " must be an integer >= 3");
                    (k == "nr" ? c.grid.nr : c.grid.ny) = v.get<std::size_t>();
                } else if (k == "r_max") {
                    if (!v.is_number() || !(v.get<double>() > 0.0))
                        throw UsageError("config: grid.r_max must be a positive number");
                    c.grid.r_max = v.get<double>();
                } else {
                    throw UsageError("config: unknown key 'grid." + k + "'");
                }
            }
        }
        if (j.contains("params")) {
            if (!j["params"].is_object()) throw UsageError("config: 'params' must be an object");
            c.params = j["params"];
        }
        if (j.contains("output_dir")) {
            if (!j["output_dir"].is_string() || j["output_dir"].get<std::string>().empty())
                throw UsageError("config: 'output_dir' must be a non-empty string");
            c.output_dir = j["output_dir"].get<std::string>();
        }
        if (j.contains("seed")) {
            if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0) throw UsageError("config: 'seed' must be a nonnegative integer");
            c.seed = j["seed"].get<std::uint64_t>();
        }
        return c;
    }

    json to_json() const
    {
        json j{{"experiment", experiment},
               {"grid", {{"nr", grid.nr}, {"ny", grid.ny}, {"r_max", grid.r_max}}},
               {"params", params},
               {"seed", seed}};
        if (!output_dir.empty()) j["output_dir"] = output_dir;
        return j;
    }
};

struct Check {
    int criterion = 0;
    std::string name;
    double value = 0.0;
    std::string relation;  // "<=", ">=", "<", ">"
    double bound = 0.0;
    bool pass = false;

    json to_json() const
    {
        return {{"criterion", criterion}, {"name", name},   {"value", value},
                {"relation", relation},   {"bound", bound}, {"pass", pass}};
    }
};

struct Plot {
    std::string name;   // script file stem
    std::string title;
    std::string csv;
    std::string x;
    std::vector<std::string> y;
    bool logx = false;
    bool logy = false;

    json to_json() const
    {
        return {{"name", name}, {"title", title}, {"csv", csv}, {"x", x}, {"y", y}, {"logx", logx}, {"logy", logy}};
    }
};

struct ExperimentReport {
    std::string experiment;
    json values = json::object();
    std::vector<Check> checks;
    std::vector<std::pair<std::string, CsvWriter>> tables;
    std::vector<Plot> plots;

    void check(int criterion, std::string name, double value, std::string relation, double bound)
    {
        bool ok = false;
        if (relation == "<=") ok = value <= bound;
        else if (relation == ">=") ok = value >= bound;
        else if (relation == "<") ok = value < bound;
        else if (relation == ">") ok = value > bound;
        else throw DomainError("check: unknown relation " + relation);
        checks.push_back({criterion, std::move(name), value, std::move(relation), bound, ok});
    }

    CsvWriter& table(const std::string& file, std::vector<std::string> header)
    {
        tables.emplace_back(file, CsvWriter(std::move(header)));
        return tables.back().second;
    }

    bool pass() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    }

    bool pass(int criterion) const
    {
        bool any = false;
        for (const auto& c : checks)
            if (c.criterion == criterion) {
                any = true;
                if (!c.pass) return false;
            }
        return any;
    }

    json summary(const ExperimentConfig& cfg) const
    {
        json j;
        j["experiment"] = experiment;
        j["config"] = cfg.to_json();
        j["config"].erase("output_dir");  // location is not provenance
        j["values"] = values;
        j["checks"] = json::array();
        for (const auto& c : checks) j["checks"].push_back(c.to_json());
        j["tables"] = json::array();
        for (const auto& t : tables) j["tables"].push_back(t.first);
        j["plots"] = json::array();
        for (const auto& p : plots) j["plots"].push_back(p.to_json());
        j["pass"] = pass();
        return j;
    }
};

// Runs f(0) .. f(n - 1) on up to `jobs` threads. Results must be written to per-index
// slots; the first failing index is rethrown after all workers finish.
template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F&& f)
{
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(jobs, n); ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < n;) {
                try {
                    f(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// Experiment parameters: defaults overlaid by the config's params, unknown keys rejected.
class Params {
public:
    Params(const json& given, json defaults, const std::string& experiment) : values_(std::move(defaults))
    {
        for (const auto& [k, v] : given.items()) {
            if (!values_.contains(k)) throw UsageError(experiment + ": unknown parameter '" + k + "'");
            if (!compatible(values_[k], v)) throw UsageError(experiment + ": parameter '" + k + "' has the wrong type");
            if (k == "criteria")
                for (const auto& c : v)
                    if (std::find(values_[k].begin(), values_[k].end(), c) == values_[k].end())
                        throw UsageError(experiment + ": criterion " + c.dump() + " is not part of this experiment");
            values_[k] = v;
        }
    }

    template <class T>
    T get(const std::string& key) const
    {
        return values_.at(key).get<T>();
    }

    bool wants(int criterion) const
    {
        const json& c = values_.at("criteria");
        return std::find(c.begin(), c.end(), criterion) != c.end();
    }

    const json& all() const { return values_; }

private:
    static bool compatible(const json& def, const json& v)
    {
        if (def.is_number()) return v.is_number();
        if (def.is_array()) {
            if (!v.is_array() || v.empty()) return false;
            if (def.empty()) return true;
            return std::all_of(v.begin(), v.end(), [&](const json& x) { return compatible(def.front(), x); });
        }
        return def.type() == v.type();
    }

    json values_;
};

namespace detail {

// trapezoid int G(u) dr dy
template <class G>
double grid_integral(const GridFunction& u, G&& g)
{
    const LogGrid& grid = u.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < grid.nr(); ++i)
        for (std::size_t j = 0; j < grid.ny(); ++j) s += grid.weight(i, j) * g(u.at(i, j));
    return s;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

inline std::vector<std::string> cells(std::initializer_list<std::string> s) { return s; }

// least-squares slope of y against x
inline double slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k];
        sy += y[k];
        sxx += x[k] * x[k];
        sxy += x[k] * y[k];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// --- criterion 1 ---------------------------------------------------------------------

inline void run_mellin_check(const ExperimentConfig&, const Params& P, std::size_t jobs, ExperimentReport& rep)
{
    const auto gammas = P.get<std::vector<double>>("gammas");
    const double s_max = P.get<double>("s_max"), p = P.get<double>("shift_p"), beta = P.get<double>("dilation_beta");
    const auto n = P.get<std::size_t>("n");
    const auto tau = uniform_tau(P.get<double>("tau_max"), P.get<std::size_t>("tau_n"));
    const auto corpus = mellin_corpus();

    struct Row {
        IdentityReport id;
        double plancherel = 0.0;
    };
    std::vector<Row> rows(corpus.size() * gammas.size());
    parallel_for(rows.size(), jobs, [&](std::size_t i) {
        const auto u = HalfLineFunction::from_callable(corpus[i / gammas.size()].u, s_max, n);
        const double gamma = gammas[i % gammas.size()];
        rows[i].id = identity_suite(u, gamma, p, beta, tau);
        const auto pl = plancherel_check(u, gamma);
        rows[i].plancherel = rel(pl.rhs, pl.lhs);
    });
    auto& t = rep.table("identities.csv", {"function", "gamma", "derivative", "shift", "logarithm", "dilation", "plancherel"});
    double worst[5] = {0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        t.row({corpus[i / gammas.size()].name, fmt(gammas[i % gammas.size()]), fmt(r.id.derivative), fmt(r.id.shift),
               fmt(r.id.logarithm), fmt(r.id.dilation), fmt(r.plancherel)});
        const double v[5] = {r.id.derivative, r.id.shift, r.id.logarithm, r.id.dilation, r.plancherel};
        for (int k = 0; k < 5; ++k) worst[k] = std::max(worst[k], v[k]);
    }
    const char* names[5] = {"derivative identity residual", "shift identity residual", "logarithm identity residual",
                            "dilation identity residual", "Plancherel relative difference"};
    for (int k = 0; k < 5; ++k) rep.check(1, names[k], worst[k], "<=", 1e-5);

    // Gaussian e^{-s^2}: M(z) = sqrt(pi) e^{z^2/4}
    const auto g = HalfLineFunction::from_callable(corpus[0].u, s_max, n);
    auto& gt = rep.table("gaussian.csv", {"gamma", "tau", "re", "im", "exact_re", "exact_im"});
    double gauss = 0.0;
    for (double gamma : gammas) {
        const MellinSamples F = mellin_transform(g, gamma, tau);
        std::vector<cplx> exact(tau.size());
        for (std::size_t k = 0; k < tau.size(); ++k) {
            exact[k] = std::sqrt(std::numbers::pi) * std::exp(F.z(k) * F.z(k) / 4.0);
            gt.row({gamma, tau[k], F.values[k].real(), F.values[k].imag(), exact[k].real(), exact[k].imag()});
        }
        gauss = std::max(gauss, sup_relative(F.values, exact));
    }
    rep.check(1, "Gaussian closed form sup relative error", gauss, "<=", 1e-6);
    rep.values["max_identity_residual"] = *std::max_element(worst, worst + 4);
    rep.values["plancherel"] = worst[4];
    rep.values["gaussian_closed_form"] = gauss;
    rep.plots.push_back({"gaussian_transform", "Mellin transform of exp(-ln^2 t)", "gaussian.csv", "tau",
                         {"re", "exact_re"}, false, false});
}

// --- criterion 2 ---------------------------------------------------------------------

inline void run_mt_sharpness(const ExperimentConfig&, const Params& P, std::size_t jobs, ExperimentReport& rep)
{
    const auto ks = P.get<std::vector<double>>("k");
    const auto nodes = P.get<std::size_t>("sample_nodes");
    struct Row {
        double grad, grad_sampled, l2, mtf, ratio;
    };
    std::vector<Row> rows(ks.size());
    parallel_for(ks.size(), jobs, [&](std::size_t i) {
        const auto u = moser_sequence(ks[i]);
        rows[i] = {std::sqrt(dirichlet_energy(u)), std::sqrt(sampled_dirichlet_energy(u, nodes)), l2_squared(u),
                   mt_functional(u, alpha2), mt_ratio(u, alpha2)};
    });
    auto& t = rep.table("sharpness.csv", {"k", "grad_norm", "grad_norm_sampled", "l2_squared", "mt_functional", "ratio"});
    double grad = 0.0, sampled = 0.0, mtf = HUGE_VAL;
    int l2_up = 0, ratio_down = 0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const auto& r = rows[i];
        t.row({ks[i], r.grad, r.grad_sampled, r.l2, r.mtf, r.ratio});
        grad = std::max(grad, std::abs(r.grad - 1.0));
        sampled = std::max(sampled, std::abs(r.grad_sampled - 1.0));
        mtf = std::min(mtf, r.mtf);
        if (i > 0 && !(r.l2 < rows[i - 1].l2)) ++l2_up;
        if (i > 0 && !(r.ratio > rows[i - 1].ratio)) ++ratio_down;
    }
    rep.check(2, "analytic |grad u_k| - 1", grad, "<=", 1e-10);
    rep.check(2, "sampled |grad u_k| - 1", sampled, "<=", 2e-3);
    rep.check(2, "|u_k|_2^2 increases (count)", l2_up, "<=", 0);
    rep.check(2, "|u_last|_2^2 / |u_first|_2^2", rows.back().l2 / rows.front().l2, "<", 0.2);
    rep.check(2, "min mt_functional(u_k, alpha_2)", mtf, ">=", 0.5);
    rep.check(2, "mt_ratio decreases (count)", ratio_down, "<=", 0);
    rep.check(2, "ratio(last) / ratio(first)", rows.back().ratio / rows.front().ratio, ">=", 10.0);
    rep.values["ratio_growth"] = rows.back().ratio / rows.front().ratio;
    rep.plots.push_back({"ratio_vs_k", "MT ratio of the Moser sequence", "sharpness.csv", "k", {"ratio"}, true, true});
}

// --- criteria 3 and 6 ------------------------------------------------------------------

inline std::vector<std::pair<std::string, RadialProfile>> admissible_suite(std::size_t count, std::uint64_t seed)
{
    std::vector<std::pair<std::string, RadialProfile>> out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> inc(0.0, 1.0);
    for (std::size_t m = 0; m < count; ++m) {
        const std::size_t n = 400;
        const double T = 40.0;
        std::vector<double> t(n + 1), w(n + 1, 0.0);
        for (std::size_t k = 0; k <= n; ++k) t[k] = T * static_cast<double>(k) / static_cast<double>(n);
        for (std::size_t k = 1; k <= n; ++k) w[k] = w[k - 1] + inc(rng) * inc(rng);
        const double scale = 1.0 / std::sqrt(admissibility_integral(RadialProfile(RadialVariable::moser_t, t, w), 2.0));
        for (double& x : w) x *= scale * (1.0 - 1e-12);
        out.emplace_back("random_" + std::to_string(m), RadialProfile(RadialVariable::moser_t, t, w));
    }
    for (double t1 : {1.0, 4.0, 16.0}) out.emplace_back("blowup_" + fmt(t1), blowup_profile(t1, 2.0));
    out.emplace_back("zero", RadialProfile(RadialVariable::moser_t, {0.0, 1.0}, {0.0, 0.0}));
    return out;
}

// radial test profiles with support radius 1
inline std::vector<std::pair<std::string, RadialFunction>> radial_profiles()
{
    const double pi = std::numbers::pi;
    RadialFunction quartic{[](double r) { return r < 1.0 ? std::pow(1.0 - r * r, 4) : 0.0; },
                           [](double r) { return r < 1.0 ? -8.0 * r * std::pow(1.0 - r * r, 3) : 0.0; },
                           {0.0, 1.0}};
    RadialFunction cone{[](double r) { return r < 1.0 ? 1.0 - r : 0.0; }, [](double r) { return r < 1.0 ? -1.0 : 0.0; },
                        {0.0, 1.0}};
    RadialFunction cosine{[pi](double r) { return r < 1.0 ? std::pow(std::cos(0.5 * pi * r), 2) : 0.0; },
                          [pi](double r) { return r < 1.0 ? -0.5 * pi * std::sin(pi * r) : 0.0; },
                          {0.0, 1.0}};
    return {{"moser_u4", moser_sequence(4.0)},
            {"moser_M2", moser_function(1.0)},
            {"quartic", quartic},
            {"cone", cone},
            {"cosine_squared", cosine}};
}

inline void run_one_d_reduction(const ExperimentConfig& cfg, const Params& P, std::size_t jobs, ExperimentReport& rep)
{
    if (P.wants(3)) {
        // (a) subcritical envelope
        const auto suite = admissible_suite(P.get<std::size_t>("suite_size"), cfg.seed);
        const auto betas = P.get<std::vector<double>>("betas_sub");
        auto& t = rep.table("subcritical.csv", {"profile", "beta", "value", "bound"});
        double excess = -HUGE_VAL;
        for (const auto& [name, w] : suite)
            for (double b : betas) {
                const double v = one_d_functional(w, b, 2.0), bound = 1.0 / (1.0 - b);
                t.row({name, fmt(b), fmt(v), fmt(bound)});
                excess = std::max(excess, v - bound);
            }
        rep.check(3, "(a) max one_d_functional - 1/(1 - beta)", excess, "<=", 1e-6);

        // (b) beta = 1 along the blow-up family, base and doubled t-grids
        const auto t1s = P.get<std::vector<double>>("blowup_t1");
        std::vector<double> base(t1s.size()), fine(t1s.size());
        parallel_for(t1s.size(), jobs, [&](std::size_t i) {
            const auto cells = static_cast<std::size_t>(std::max(16.0, std::ceil(t1s[i] / 0.02)));
            base[i] = one_d_functional(blowup_profile(t1s[i], 2.0, cells), 1.0, 2.0);
            fine[i] = one_d_functional(blowup_profile(t1s[i], 2.0, 2 * cells), 1.0, 2.0);
        });
        auto& c = rep.table("critical_family.csv", {"t1", "value", "value_doubled"});
        double change = 0.0;
        for (std::size_t i = 0; i < t1s.size(); ++i) {
            c.row({t1s[i], base[i], fine[i]});
            change = std::max(change, rel(fine[i], base[i]));
        }
        const double C = *std::max_element(base.begin(), base.end());
        rep.values["critical_constant"] = C;
        rep.check(3, "(b) max value on the doubled t-grid / recorded constant", *std::max_element(fine.begin(), fine.end()) / C,
                  "<=", 1.01);
        rep.check(3, "(b) relative change under t-grid doubling", change, "<=", 1e-2);

        // (c) beta > 1: growth rate of the functional in t1
        const auto st1 = P.get<std::vector<double>>("slope_t1");
        const auto sb = P.get<std::vector<double>>("betas_super");
        std::vector<std::vector<double>> vals(sb.size(), std::vector<double>(st1.size()));
        parallel_for(sb.size() * st1.size(), jobs, [&](std::size_t i) {
            const std::size_t b = i / st1.size(), k = i % st1.size();
            vals[b][k] = one_d_functional(blowup_profile(st1[k], 2.0), sb[b], 2.0);
        });
        std::vector<std::string> head{"t1"};
        for (double b : sb) head.push_back("beta_" + fmt(b));
        auto& s = rep.table("supercritical.csv", head);
        for (std::size_t k = 0; k < st1.size(); ++k) {
            std::vector<std::string> row{fmt(st1[k])};
            for (std::size_t b = 0; b < sb.size(); ++b) row.push_back(fmt(vals[b][k]));
            s.row(row);
        }
        for (std::size_t b = 0; b < sb.size(); ++b) {
            std::vector<double> logs;
            for (double v : vals[b]) logs.push_back(std::log(v));
            const double sl = slope(st1, logs);
            rep.values["slope_beta_" + fmt(sb[b])] = sl;
            rep.check(3, "(c) |slope / (beta - 1) - 1| at beta = " + fmt(sb[b]), std::abs(sl / (sb[b] - 1.0) - 1.0), "<=",
                      0.05);
        }
        rep.plots.push_back({"functional_vs_t1", "1-D functional along the blow-up family", "supercritical.csv", "t1",
                             std::vector<std::string>(head.begin() + 1, head.end()), false, true});
    }
    if (P.wants(6)) {
        const auto profiles = radial_profiles();
        const auto fracs = P.get<std::vector<double>>("reduction_alpha_fractions");
        const auto nodes = P.get<std::size_t>("reduction_nodes");
        const auto tn = P.get<std::size_t>("reduction_t_nodes");
        const double R = 1.0, ball = std::numbers::pi * R * R;
        struct Row {
            double lambda;
            std::vector<double> lhs, rhs;
        };
        std::vector<Row> rows(profiles.size());
        parallel_for(profiles.size(), jobs, [&](std::size_t i) {
            const RadialFunction& f = profiles[i].second;
            const RadialProfile raw = reduce_to_1d(RadialProfile::sample(f, nodes), R, {tn, 0.0});
            // unit energy: w / lambda pairs with u / lambda
            const double lambda = std::sqrt(admissibility_integral(raw, 2.0));
            std::vector<double> v = raw.values();
            for (double& x : v) x /= lambda;
            const RadialProfile w(RadialVariable::moser_t, raw.grid(), v);
            rows[i].lambda = lambda;
            for (double a : fracs) {
                rows[i].lhs.push_back(ball * one_d_functional(w, a, 2.0));
                rows[i].rhs.push_back(mt_integral(f, a * alpha2, lambda) + ball);
            }
        });
        auto& t = rep.table("reduction.csv", {"profile", "alpha", "two_d_plus_ball", "ball_times_one_d", "rel_diff"});
        double worst = 0.0;
        for (std::size_t i = 0; i < profiles.size(); ++i)
            for (std::size_t a = 0; a < fracs.size(); ++a) {
                const double d = rel(rows[i].lhs[a], rows[i].rhs[a]);
                worst = std::max(worst, d);
                t.row({profiles[i].first, fmt(fracs[a] * alpha2), fmt(rows[i].rhs[a]), fmt(rows[i].lhs[a]), fmt(d)});
            }
        rep.check(6, "max relative difference of the reduction identity", worst, "<=", 1e-3);
        rep.values["reduction_max_rel_diff"] = worst;
    }
}

// --- criterion 4 ---------------------------------------------------------------------

inline void run_scale_invariance(const ExperimentConfig& cfg, const Params& P, std::size_t jobs, ExperimentReport& rep)
{
    const LogGrid g(ConeDomain(DomainKind::full_cone, cfg.grid.r_max), cfg.grid.nr, cfg.grid.ny);
    const double a = P.get<double>("bump_radius");
    const auto u = GridFunction::sample(g, [a](double r, double y) { return quartic_bump(r, y, 0.0, 0.0, a, 1.0); });
    const auto rs = P.get<std::vector<double>>("r");
    const auto fracs = P.get<std::vector<double>>("alpha_fractions");
    const double e0 = dirichlet_seminorm(u, DiffOrder::fourth);
    const double l0 = std::pow(lp_gamma_norm(u, {2.0, 1.0, 0}), 2);
    std::vector<double> m0;
    for (double f : fracs) m0.push_back(mt_ratio(u, f * alpha2, DiffOrder::fourth));
    struct Row {
        double grad, l2;
        std::vector<double> mt;
    };
    std::vector<Row> rows(rs.size());
    parallel_for(rs.size(), jobs, [&](std::size_t i) {
        const auto v = scale_map(u, rs[i]);
        rows[i].grad = dirichlet_seminorm(v, DiffOrder::fourth) / e0;
        rows[i].l2 = std::pow(lp_gamma_norm(v, {2.0, 1.0, 0}), 2) * rs[i] * rs[i] / l0;
        for (std::size_t k = 0; k < fracs.size(); ++k)
            rows[i].mt.push_back(mt_ratio(v, fracs[k] * alpha2, DiffOrder::fourth) / m0[k]);
    });
    std::vector<std::string> head{"r", "grad_ratio", "l2_ratio"};
    for (double f : fracs) head.push_back("mt_ratio_rel_alpha_" + fmt(f * alpha2));
    auto& t = rep.table("scale.csv", head);
    double dg = 0.0, dl = 0.0, dm = 0.0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        std::vector<std::string> row{fmt(rs[i]), fmt(rows[i].grad), fmt(rows[i].l2)};
        for (double m : rows[i].mt) {
            row.push_back(fmt(m));
            dm = std::max(dm, std::abs(m - 1.0));
        }
        t.row(row);
        dg = std::max(dg, std::abs(rows[i].grad - 1.0));
        dl = std::max(dl, std::abs(rows[i].l2 - 1.0));
    }
    rep.check(4, "max |grad ratio - 1|", dg, "<=", 1e-3);
    rep.check(4, "max |r^2 L2 ratio - 1|", dl, "<=", 1e-3);
    rep.check(4, "max relative change of mt_ratio", dm, "<=", 2e-3);
}

// --- criterion 5 ---------------------------------------------------------------------

inline void run_polya_szego(const ExperimentConfig& cfg, const Params& P, std::size_t jobs, ExperimentReport& rep)
{
    const auto corpus = bump_corpus(P.get<std::size_t>("corpus_size"), cfg.seed);
    const double R = cfg.grid.r_max;
    const auto ne = P.get<std::size_t>("equimeasurability_n");
    const auto gap_n = P.get<std::vector<std::size_t>>("gap_n");
    if (gap_n.size() != 2) throw UsageError("polya-szego: gap_n must hold two resolutions");

    struct Row {
        double grid[3], prof[3], star[3];
        double gap[2], energy[2], energy_star[2];
    };
    std::vector<Row> rows(corpus.size());
    parallel_for(corpus.size(), jobs, [&](std::size_t i) {
        const LogGrid g(ConeDomain(DomainKind::full_cone, R), ne, ne);
        const auto u = sample_bumps(g, corpus[i]);
        const auto r = rearrange(u);
        auto G0 = [](double s) { return s * s; };
        auto G1 = [](double s) { return s * s * s * s; };
        auto G2 = [](double s) { return std::expm1(s * s); };
        rows[i].grid[0] = grid_integral(u, G0);
        rows[i].grid[1] = grid_integral(u, G1);
        rows[i].grid[2] = grid_integral(u, G2);
        rows[i].prof[0] = profile_integral(r.profile, G0);
        rows[i].prof[1] = profile_integral(r.profile, G1);
        rows[i].prof[2] = profile_integral(r.profile, G2);
        rows[i].star[0] = grid_integral(r.grid, G0);
        rows[i].star[1] = grid_integral(r.grid, G1);
        rows[i].star[2] = grid_integral(r.grid, G2);
        for (std::size_t k = 0; k < 2; ++k) {
            const LogGrid gk(ConeDomain(DomainKind::full_cone, R), gap_n[k], gap_n[k]);
            const auto t = polya_szego_terms(sample_bumps(gk, corpus[i]));
            rows[i].energy[k] = t.energy;
            rows[i].energy_star[k] = t.energy_star;
            rows[i].gap[k] = t.gap();
        }
    });
    const char* gname[3] = {"s^2", "s^4", "exp(s^2)-1"};
    auto& e = rep.table("equimeasurability.csv", {"function", "G", "integral_u", "integral_profile", "integral_grid_star",
                                                   "rel_err_profile", "rel_err_grid_star"});
    auto& p = rep.table("polya_szego.csv", {"function", "n", "energy", "energy_star", "gap"});
    double ep = 0.0, eg = 0.0;
    double min_gap[2] = {HUGE_VAL, HUGE_VAL};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int k = 0; k < 3; ++k) {
            const double a = rel(rows[i].prof[k], rows[i].grid[k]), b = rel(rows[i].star[k], rows[i].grid[k]);
            ep = std::max(ep, a);
            eg = std::max(eg, b);
            e.row({std::to_string(i), gname[k], fmt(rows[i].grid[k]), fmt(rows[i].prof[k]), fmt(rows[i].star[k]), fmt(a),
                   fmt(b)});
        }
        for (int k = 0; k < 2; ++k) {
            p.row({std::to_string(i), std::to_string(gap_n[k]), fmt(rows[i].energy[k]), fmt(rows[i].energy_star[k]),
                   fmt(rows[i].gap[k])});
            min_gap[k] = std::min(min_gap[k], rows[i].gap[k]);
        }
    }
    const double eps0 = std::max(0.0, -min_gap[0]), eps1 = std::max(0.0, -min_gap[1]);
    rep.values["eps_h"] = {{std::to_string(gap_n[0]), eps0}, {std::to_string(gap_n[1]), eps1}};
    rep.values["min_gap"] = {{std::to_string(gap_n[0]), min_gap[0]}, {std::to_string(gap_n[1]), min_gap[1]}};
    rep.check(5, "max relative equimeasurability error, continuum u*", ep, "<=", 1e-6);
    rep.check(5, "max relative equimeasurability error, grid u*", eg, "<=", 1e-6);
    rep.check(5, "eps_h at n = " + std::to_string(gap_n[1]) + " vs half of n = " + std::to_string(gap_n[0]), eps1, "<=",
              0.5 * eps0);
    rep.plots.push_back({"polya_szego_gap", "Polya-Szego gap per corpus function", "polya_szego.csv", "function",
                         {"gap"}, false, false});
}

// --- criterion 7 ---------------------------------------------------------------------

inline void run_eigen(const ExperimentConfig& cfg, const Params& P, std::size_t jobs, ExperimentReport& rep)
{
    const auto Rs = P.get<std::vector<double>>("r_max_values");
    const auto ns = P.get<std::vector<std::size_t>>("refinement_n");
    std::vector<EigenResult> main(Rs.size());
    std::vector<double> refine(ns.size());
    parallel_for(Rs.size() + ns.size(), jobs, [&](std::size_t i) {
        if (i < Rs.size()) {
            main[i] = first_eigenvalue(DiscreteOperator(
                LogGrid(ConeDomain(DomainKind::bounded_strip, Rs[i]), cfg.grid.nr, cfg.grid.ny)));
        } else {
            const std::size_t n = ns[i - Rs.size()];
            refine[i - Rs.size()] =
                first_eigenvalue(DiscreteOperator(LogGrid(ConeDomain(DomainKind::bounded_strip, Rs.front()), n, n)))
                    .lambda1;
        }
    });
    auto& t = rep.table("eigen.csv", {"r_max", "nr", "ny", "lambda1", "oracle", "rel_err", "residual"});
    double worst = 0.0;
    for (std::size_t i = 0; i < Rs.size(); ++i) {
        const double oracle = separable_eigenvalue(ConeDomain(DomainKind::bounded_strip, Rs[i]));
        const double e = rel(main[i].lambda1, oracle);
        worst = std::max(worst, e);
        t.row({Rs[i], static_cast<double>(cfg.grid.nr), static_cast<double>(cfg.grid.ny), main[i].lambda1, oracle, e,
               main[i].residual});
        rep.values["lambda1_r_max_" + fmt(Rs[i])] = {{"lambda1", main[i].lambda1}, {"oracle", oracle}};
    }
    rep.check(7, "max relative error of lambda1", worst, "<=", 5e-3);
    const double oracle = separable_eigenvalue(ConeDomain(DomainKind::bounded_strip, Rs.front()));
    auto& r = rep.table("refinement.csv", {"n", "lambda1", "error", "order"});
    double lo = HUGE_VAL, hi = -HUGE_VAL;
    for (std::size_t k = 0; k < ns.size(); ++k) {
        double order = std::nan("");
        if (k > 0) {
            order = std::log2(std::abs(refine[k - 1] - oracle) / std::abs(refine[k] - oracle));
            lo = std::min(lo, order);
            hi = std::max(hi, order);
        }
        r.row({static_cast<double>(ns[k]), refine[k], std::abs(refine[k] - oracle), order});
    }
    rep.check(7, "min refinement order", lo, ">=", 1.8);
    rep.check(7, "max refinement order", hi, "<=", 2.2);
    rep.plots.push_back({"eigen_convergence", "lambda1 error under refinement", "refinement.csv", "n", {"error"}, true,
                         true});
}

// --- criterion 8 ---------------------------------------------------------------------

inline void run_mt_subcritical(const ExperimentConfig& cfg, const Params& P, std::size_t jobs, ExperimentReport& rep)
{
    const LogGrid g(ConeDomain(DomainKind::full_cone, cfg.grid.r_max), cfg.grid.nr, cfg.grid.ny);
    const auto corpus = bump_corpus(P.get<std::size_t>("corpus_size"), cfg.seed);
    const auto fracs = P.get<std::vector<double>>("alpha_fractions");
    const auto cs = P.get<std::vector<double>>("homogeneity_c");
    struct Row {
        double grad;
        std::vector<double> lux, homog;
    };
    std::vector<Row> rows(corpus.size());
    parallel_for(corpus.size(), jobs, [&](std::size_t i) {
        const auto u = sample_bumps(g, corpus[i]);
        rows[i].grad = dirichlet_seminorm(u);
        for (double f : fracs) rows[i].lux.push_back(luxemburg_norm(u, NFunction{f * alpha2}));
        const double base = rows[i].lux.back();
        for (double c : cs) rows[i].homog.push_back(rel(luxemburg_norm(c * u, NFunction{fracs.back() * alpha2}), c * base));
    });
    auto& t = rep.table("luxemburg.csv", {"function", "alpha", "luxemburg", "grad_norm", "ratio"});
    double worst = 0.0, homog = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t k = 0; k < fracs.size(); ++k) {
            const double r = rows[i].lux[k] / rows[i].grad;
            worst = std::max(worst, r);
            t.row({static_cast<double>(i), fracs[k] * alpha2, rows[i].lux[k], rows[i].grad, r});
        }
        for (double h : rows[i].homog) homog = std::max(homog, h);
    }
    rep.values["max_luxemburg_ratio"] = worst;
    rep.check(8, "max |u|_A / |grad u|_2", worst, "<=", 1.0 + 1e-2);
    rep.check(8, "max relative homogeneity defect", homog, "<=", 1e-8);
}

// --- criteria 9, 10, 12 ----------------------------------------------------------------

inline void run_mp_solve(const ExperimentConfig& cfg, const Params& P, std::size_t jobs, ExperimentReport& rep)
{
    const LogGrid g(ConeDomain(DomainKind::bounded_strip, cfg.grid.r_max), cfg.grid.nr, cfg.grid.ny);
    const DiscreteOperator A(g);
    const auto poly = NonlinearitySpec::polynomial(P.get<double>("p_exp"));
    const auto sub = NonlinearitySpec::subcritical(P.get<double>("gamma_exp"), P.get<double>("c"));
    const auto crit = NonlinearitySpec::critical(P.get<double>("alpha0"), P.get<double>("c"));
    const std::vector<std::pair<std::string, NonlinearitySpec>> shipped{
        {"polynomial", poly}, {"subcritical", sub}, {"critical", crit}};

    // gradient gate
    const auto pairs = P.get<std::size_t>("fd_pairs");
    const double eps = P.get<double>("fd_eps");
    std::mt19937_64 rng(cfg.seed);
    auto& gt = rep.table("gradient_gate.csv", {"spec", "pair", "finite_difference", "analytic", "scaled_error"});
    double gate = 0.0;
    for (std::size_t p = 0; p < pairs; ++p) {
        GridFunction u = random_direction(g, rng), v = random_direction(g, rng);
        u *= 1.0 / u.max_abs();
        v *= 1.0 / v.max_abs();
        for (const auto& [name, s] : shipped) {
            const double fd = (energy(A, s, u + eps * v) - energy(A, s, u - eps * v)) / (2.0 * eps);
            const double an = A.inner(gradient(A, s, u), v);
            const double e = std::abs(fd - an) / std::max(1.0, std::abs(an));
            gate = std::max(gate, e);
            gt.row({name, std::to_string(p), fmt(fd), fmt(an), fmt(e)});
        }
    }
    const bool gate_ok = gate <= 1e-6;
    if (P.wants(12)) rep.check(12, "max |fd - analytic| / max(1, |analytic|)", gate, "<=", 1e-6);

    std::vector<std::size_t> run;
    if (P.wants(9)) run.push_back(0);
    if (P.wants(10)) {
        run.push_back(1);
        run.push_back(2);
    }
    if (run.empty()) return;
    if (!gate_ok) {
        for (std::size_t k : run) rep.check(k == 0 ? 9 : 10, shipped[k].first + ": gradient gate", gate, "<=", 1e-6);
        return;
    }
    MPOptions opt;
    opt.path_points = P.get<std::size_t>("path_points");
    opt.tol = P.get<double>("tol");
    opt.seed = cfg.seed;
    NewtonOptions nopt;
    nopt.tol = P.get<double>("newton_tol");
    std::vector<MPResult> mp(run.size());
    std::vector<NewtonResult> nt(run.size());
    parallel_for(run.size(), jobs, [&](std::size_t i) {
        mp[i] = mp_solve(A, shipped[run[i]].second, opt);
        nt[i] = newton_refine(A, shipped[run[i]].second, mp[i].u_star, nopt);
    });
    for (std::size_t i = 0; i < run.size(); ++i) {
        const auto& [name, s] = shipped[run[i]];
        const int c = run[i] == 0 ? 9 : 10;
        const MPResult& r = mp[i];
        const NewtonResult& n = nt[i];
        auto& h = rep.table("history_" + name + ".csv", {"iteration", "path_max", "grad_norm", "step", "segment"});
        int rises = 0;
        for (std::size_t k = 0; k < r.history.size(); ++k) {
            const auto& e = r.history[k];
            h.row({static_cast<double>(e.iteration), e.path_max, e.grad_norm, e.step, static_cast<double>(e.index)});
            if (k > 0 && e.path_max > r.history[k - 1].path_max) ++rises;
        }
        auto& pt = rep.table("path_" + name + ".csv", {"node", "arclength", "energy"});
        for (std::size_t k = 0; k < r.path_energy.size(); ++k)
            pt.row({static_cast<double>(k), r.path_arclength[k], r.path_energy[k]});
        auto& us = rep.table("u_star_" + name + ".csv", {"r", "y", "u"});
        for (std::size_t a = 0; a < g.nr(); ++a)
            for (std::size_t b = 0; b < g.ny(); ++b) us.row({g.r(a), g.y(b), r.u_star.at(a, b)});

        double mx = 0.0, mn = 0.0;
        for (double x : r.u_star.values()) {
            mx = std::max(mx, x);
            mn = std::min(mn, x);
        }
        const double top = std::max(mx, -mn), low = std::min(mx, -mn) + 0.0;  // no -0 in the output
        const double En = energy(A, s, n.u);
        json j = r.to_json(A, s);
        j["conditions"] = validate_conditions(s, r.lambda1).to_json();
        j["newton"] = {{"residual", n.residual}, {"iterations", n.iterations}, {"converged", n.converged},
                       {"trivial", n.trivial}, {"energy", En}};
        rep.values[name] = j;

        rep.check(c, name + ": grad_norm at the path maximum", r.grad_norm, "<=", opt.tol);
        rep.check(c, name + ": Newton residual", n.residual, "<=", nopt.tol);
        rep.check(c, name + ": Newton steps", static_cast<double>(n.iterations), "<=", 8);
        rep.check(c, name + ": relative energy difference, Newton vs mountain pass", rel(En, r.level), "<=", 1e-4);
        rep.check(c, name + ": level", r.level, ">", 0.0);
        rep.check(c, name + ": level - delta", r.level - r.geometry.delta, ">=", 0.0);
        rep.check(c, name + ": I(e)", r.endpoint_energy, "<=", 0.0);
        rep.check(c, name + ": energy norm of u_star", energy_norm(A, r.u_star), ">", 1e-6);
        rep.check(c, name + ": Newton limit is trivial", n.trivial ? 1.0 : 0.0, "<=", 0.0);
        rep.check(c, name + ": opposite-sign part / max |u_star|", low / top, "<=", 1e-6);
        rep.check(c, name + ": path maximum increases (count)", rises, "<=", 0);
        if (run[i] == 2) {
            rep.check(c, name + ": level vs alpha_2 / (2 alpha0)", r.level, "<", 0.5 * alpha2 / s.alpha0);
            const double book = A.energy(r.u_star) - 2.0 * potential(A, s, r.u_star);
            rep.check(c, name + ": | |u|^2 - 2 int F - 2 level |", std::abs(book - 2.0 * r.level), "<=", 1e-6);
        }
        rep.plots.push_back({"path_" + name, "energy along the final path, " + name, "path_" + name + ".csv", "arclength",
                             {"energy"}, false, false});
        rep.plots.push_back({"convergence_" + name, "gradient norm at the path maximum, " + name,
                             "history_" + name + ".csv", "iteration", {"grad_norm"}, false, true});
    }

    // critical level against alpha0; extra sweep points are recorded, not checked
    const auto it = std::find(run.begin(), run.end(), std::size_t{2});
    if (it == run.end()) return;
    std::vector<double> a0{crit.alpha0};
    for (double a : P.get<std::vector<double>>("alpha0_sweep")) a0.push_back(a);
    std::sort(a0.begin(), a0.end());
    a0.erase(std::unique(a0.begin(), a0.end()), a0.end());
    std::vector<double> level(a0.size());
    parallel_for(a0.size(), jobs, [&](std::size_t k) {
        level[k] = a0[k] == crit.alpha0 ? mp[static_cast<std::size_t>(it - run.begin())].level
                                        : mp_solve(A, NonlinearitySpec::critical(a0[k], crit.c), opt).level;
    });
    auto& lt = rep.table("level_vs_alpha0.csv", {"alpha0", "level", "bound"});
    for (std::size_t k = 0; k < a0.size(); ++k) lt.row({a0[k], level[k], 0.5 * alpha2 / a0[k]});
    rep.plots.push_back({"level_vs_alpha0", "critical mountain-pass level", "level_vs_alpha0.csv", "alpha0",
                         {"level", "bound"}, false, false});
}

// --- criterion 11 --------------------------------------------------------------------

inline void run_f5_constant(const ExperimentConfig&, const Params& P, std::size_t, ExperimentReport& rep)
{
    const auto ns = P.get<std::vector<double>>("n");
    const auto order = P.get<std::size_t>("order");
    auto& t = rep.table("f5.csv", {"n", "value", "value_minus_2"});
    double lowest = HUGE_VAL, last = 0.0;
    for (double n : ns) {
        last = f5_constant(n, order);
        lowest = std::min(lowest, last);
        t.row({n, last, last - 2.0});
    }
    rep.values["f5_constant"] = last;
    rep.check(11, "|value(n_last) - 2|", std::abs(last - 2.0), "<=", 1e-3);
    rep.check(11, "min value", lowest, ">=", 2.0);
    rep.plots.push_back({"f5_sequence", "n int_0^1 exp(n(t^2 - t)) dt", "f5.csv", "n", {"value"}, true, false});
}

inline json default_params(const std::string& e)
{
    const std::vector<double> t1_20{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
    const std::vector<double> t1_5_25{5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25};
    if (e == "mellin-check")
        return {{"criteria", {1}},  {"gammas", {0.5, 1.0}}, {"s_max", 10.0},   {"n", 4001},
                {"shift_p", 0.5},   {"dilation_beta", 2.0}, {"tau_max", 40.0}, {"tau_n", 4096}};
    if (e == "mt-sharpness") return {{"criteria", {2}}, {"k", {4.0, 8.0, 16.0, 32.0}}, {"sample_nodes", 200}};
    if (e == "one-d-reduction")
        return {{"criteria", {3, 6}},          {"suite_size", 20},
                {"betas_sub", {0.25, 0.5, 0.75}}, {"blowup_t1", t1_20},
                {"betas_super", {1.1, 1.2}},   {"slope_t1", t1_5_25},
                {"reduction_alpha_fractions", {0.25, 0.5, 1.0}}, {"reduction_nodes", 400},
                {"reduction_t_nodes", 40001}};
    if (e == "scale-invariance")
        return {{"criteria", {4}}, {"r", {0.5, 2.0, 3.0}}, {"alpha_fractions", {0.5, 1.0}}, {"bump_radius", 0.8}};
    if (e == "polya-szego")
        return {{"criteria", {5}}, {"corpus_size", 20}, {"equimeasurability_n", 1025}, {"gap_n", {129, 257}}};
    if (e == "eigen") return {{"criteria", {7}}, {"r_max_values", {4.0, 8.0}}, {"refinement_n", {65, 129, 257}}};
    if (e == "mt-subcritical")
        return {{"criteria", {8}}, {"corpus_size", 20}, {"alpha_fractions", {0.25, 0.5, 1.0}}, {"homogeneity_c", {0.5, 3.0}}};
    if (e == "mp-solve")
        return {{"criteria", {9, 10, 12}}, {"p_exp", 4.0},       {"gamma_exp", 1.5},    {"alpha0", 0.5},
                {"c", 1.0},                {"path_points", 21},  {"tol", 1e-6},         {"newton_tol", 1e-9},
                {"fd_pairs", 20},          {"fd_eps", 1e-5},      {"alpha0_sweep", json::array()}};
    if (e == "f5-constant") return {{"criteria", {11}}, {"n", {10.0, 100.0, 1000.0, 10000.0}}, {"order", 10}};
    throw UsageError("unknown experiment '" + e + "'");
}

}  // namespace detail

inline ExperimentReport run_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1)
{
    const Params P(cfg.params, detail::default_params(cfg.experiment), cfg.experiment);
    ExperimentReport rep;
    rep.experiment = cfg.experiment;
    const std::string& e = cfg.experiment;
    if (e == "mellin-check") detail::run_mellin_check(cfg, P, jobs, rep);
    else if (e == "mt-sharpness") detail::run_mt_sharpness(cfg, P, jobs, rep);
    else if (e == "one-d-reduction") detail::run_one_d_reduction(cfg, P, jobs, rep);
    else if (e == "scale-invariance") detail::run_scale_invariance(cfg, P, jobs, rep);
    else if (e == "polya-szego") detail::run_polya_szego(cfg, P, jobs, rep);
    else if (e == "eigen") detail::run_eigen(cfg, P, jobs, rep);
    else if (e == "mt-subcritical") detail::run_mt_subcritical(cfg, P, jobs, rep);
    else if (e == "mp-solve") detail::run_mp_solve(cfg, P, jobs, rep);
    else if (e == "f5-constant") detail::run_f5_constant(cfg, P, jobs, rep);
    rep.values["params"] = P.all();
    return rep;
}

// One gnuplot script per plot entry of a summary; CSV paths are relative to the summary.
inline std::vector<std::string> emit_plots(const std::string& summary_path)
{
    namespace fs = std::filesystem;
    std::ifstream in(summary_path);
    if (!in) throw FileError("cannot read summary: " + summary_path);
    json s;
    try {
        s = json::parse(in);
    } catch (const json::exception&) {
        throw FileError("corrupted summary: " + summary_path);
    }
    if (!s.is_object() || !s.contains("plots") || !s["plots"].is_array())
        throw FileError("corrupted summary (no plot list): " + summary_path);
    const fs::path dir = fs::path(summary_path).parent_path();
    std::vector<std::string> written;
    for (const auto& p : s["plots"]) {
        if (!p.contains("name") || !p.contains("csv") || !p.contains("x") || !p.contains("y"))
            throw FileError("corrupted summary (malformed plot entry): " + summary_path);
        const std::string csv = p["csv"].get<std::string>();
        if (!fs::exists(dir / csv)) throw FileError("missing CSV for plot: " + (dir / csv).string());
        const std::string name = p["name"].get<std::string>();
        std::ostringstream o;
        o << "set datafile separator ','\n"
          << "set terminal pngcairo size 900,600\n"
          << "set output '" << name << ".png'\n"
          << "set title '" << p.value("title", name) << "'\n"
          << "set xlabel '" << p["x"].get<std::string>() << "'\n"
          << "set key top left\n";
        if (p.value("logx", false)) o << "set logscale x\n";
        if (p.value("logy", false)) o << "set logscale y\n";
        o << "plot ";
        bool first = true;
        for (const auto& y : p["y"]) {
            if (!first) o << ", \\\n     ";
            first = false;
            o << "'" << csv << "' using (column('" << p["x"].get<std::string>() << "')):(column('"
              << y.get<std::string>() << "')) with linespoints title '" << y.get<std::string>() << "'";
        }
        o << "\n";
        const fs::path out = dir / (name + ".gp");
        std::ofstream f(out, std::ios::binary);
        if (!f) throw FileError("cannot open for writing: " + out.string());
        f << o.str();
        written.push_back(out.string());
    }
    return written;
}

// CSV tables, summary.json and plot scripts under dir; returns the summary path.
inline std::string write_outputs(const ExperimentReport& rep, const ExperimentConfig& cfg, const std::string& dir)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw FileError("cannot create output directory: " + dir);
    for (const auto& [file, table] : rep.tables) table.save((fs::path(dir) / file).string());
    const std::string path = (fs::path(dir) / "summary.json").string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FileError("cannot open for writing: " + path);
    f << rep.summary(cfg).dump(2) << "\n";
    f.close();
    emit_plots(path);
    return path;
}

}  // namespace conemt
