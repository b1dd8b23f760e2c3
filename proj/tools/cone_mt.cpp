// cone-mt: runs one experiment and writes CSV tables, summary.json and gnuplot scripts.
//
//   cone-mt <experiment> [--config FILE] [--jobs N] [--out DIR] [--seed S]
//           [--nr N] [--ny N] [--r-max R] [--set key=value ...]
//   cone-mt emit-plots <summary.json>
//
// Precedence for every field: command-line flag, then config file, then defaults.
// The output directory falls back to $CONE_MT_OUT/<experiment>, then out/<experiment>.
// Exit status: 0 all checks pass, 1 a check fails or the computation errors, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "conemt/experiments.hpp"

using namespace conemt;

namespace {

json read_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError("config is not valid JSON: " + path + ": " + e.what());
    }
}

// --set key=value: value parsed as JSON when possible, else taken as a string
void apply_set(json& params, const std::string& kv)
{
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq), text = kv.substr(eq + 1);
    json v = json::parse(text, nullptr, false);
    params[key] = v.is_discarded() ? json(text) : v;
}

void write_error(const std::string& dir, const std::string& experiment, const std::string& kind, const std::string& what)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream f(std::filesystem::path(dir) / "error.json", std::ios::binary);
    if (f) f << json{{"experiment", experiment}, {"error", kind}, {"message", what}}.dump(2) << "\n";
}

std::string error_kind(const Error& e)
{
    if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
    if (dynamic_cast<const ShapeError*>(&e)) return "ShapeError";
    if (dynamic_cast<const NumericError*>(&e)) return "NumericError";
    if (dynamic_cast<const RangeError*>(&e)) return "RangeError";
    if (dynamic_cast<const PreconditionError*>(&e)) return "PreconditionError";
    if (dynamic_cast<const SolverError*>(&e)) return "SolverError";
    if (dynamic_cast<const ResolutionError*>(&e)) return "ResolutionError";
    if (dynamic_cast<const SupportOverflow*>(&e)) return "SupportOverflow";
    if (dynamic_cast<const FileError*>(&e)) return "FileError";
    return "Error";
}

struct Options {
    std::string experiment;
    std::string config;
    std::optional<std::size_t> jobs, nr, ny;
    std::optional<double> r_max;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::vector<std::string> sets;
};

ExperimentConfig resolve(const Options& o)
{
    json j = o.config.empty() ? json{{"experiment", o.experiment}} : read_config(o.config);
    if (j.is_object() && !j.empty() && !j.contains("experiment")) throw UsageError("config: 'experiment' is required");
    ExperimentConfig c = ExperimentConfig::from_json(j);
    if (c.experiment != o.experiment)
        throw UsageError("config is for '" + c.experiment + "', command line asks for '" + o.experiment + "'");
    if (o.nr) c.grid.nr = *o.nr;
    if (o.ny) c.grid.ny = *o.ny;
    if (o.r_max) c.grid.r_max = *o.r_max;
    if (o.seed) c.seed = *o.seed;
    for (const auto& s : o.sets) apply_set(c.params, s);
    if (!o.out.empty()) c.output_dir = o.out;
    if (c.output_dir.empty()) {
        const char* env = std::getenv("CONE_MT_OUT");
        c.output_dir = (std::filesystem::path(env && *env ? env : "out") / c.experiment).string();
    }
    // re-validate after overrides
    return ExperimentConfig::from_json(c.to_json());
}

int run(const Options& o)
{
    ExperimentConfig cfg;
    try {
        cfg = resolve(o);
    } catch (const UsageError& e) {
        std::cerr << "cone-mt: " << e.what() << "\n";
        return 2;
    }
    try {
        const ExperimentReport rep = run_experiment(cfg, o.jobs.value_or(1));
        const std::string summary = write_outputs(rep, cfg, cfg.output_dir);
        for (const auto& c : rep.checks)
            std::cout << (c.pass ? "ok   " : "FAIL ") << "[" << c.criterion << "] " << c.name << ": " << fmt(c.value) << " "
                      << c.relation << " " << fmt(c.bound) << "\n";
        std::cout << "summary: " << summary << "\n";
        return rep.pass() ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "cone-mt: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "cone-mt: bad parameter: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        write_error(cfg.output_dir, cfg.experiment, error_kind(e), e.what());
        std::cerr << "cone-mt: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Numerical experiments for the Moser-Trudinger inequality on a cone"};
    app.require_subcommand(1);
    Options o;
    for (const auto& name : experiment_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", o.config, "JSON experiment config");
        sub->add_option("--jobs", o.jobs, "worker threads for independent parameter points")->check(CLI::PositiveNumber);
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--seed", o.seed, "random seed");
        sub->add_option("--nr", o.nr, "grid nodes in r");
        sub->add_option("--ny", o.ny, "grid nodes in y");
        sub->add_option("--r-max", o.r_max, "domain length in r");
        sub->add_option("--set", o.sets, "override a parameter, key=value (value is JSON)");
        sub->callback([&o, name] { o.experiment = name; });
    }
    std::string summary;
    auto* plots = app.add_subcommand("emit-plots", "write gnuplot scripts for an existing summary.json");
    plots->add_option("summary", summary, "path to summary.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (plots->parsed()) {
        try {
            for (const auto& s : emit_plots(summary)) std::cout << s << "\n";
            return 0;
        } catch (const Error& e) {
            std::cerr << "cone-mt: " << e.what() << "\n";
            return 1;
        }
    }
    return run(o);
}
