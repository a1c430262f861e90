#pragma once

// CLI front end: subcommand + flags -> ExperimentConfig. An optional JSON
// config file supplies defaults; explicit flags win. Exit contract:
// 0 = experiment predicate passed, 1 = predicate failed or runtime error,
// 2 = usage/config error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sechlab/experiments.hpp"

namespace sechlab {

struct CliResult {
    int exit_code = 0;
    bool proceed = false;
    ExperimentConfig config;
};

namespace detail {

inline void apply_config_file(const std::string& path, const std::string& subcommand,
                              ExperimentConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config: " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    for (const auto& [key, val] : j.items()) {
        if (key == "experiment") {
            if (val.get<std::string>() != subcommand)
                throw std::invalid_argument(
                    "config: experiment in file does not match subcommand");
        } else if (key == "dist") {
            cfg.dist = dist_from_name(val.get<std::string>());
        } else if (key == "scale") {
            cfg.scale = val.get<double>();
        } else if (key == "n_samples") {
            cfg.n_samples = val.get<std::size_t>();
        } else if (key == "trials") {
            cfg.trials = val.get<std::size_t>();
        } else if (key == "seed") {
            cfg.seed = val.get<std::uint64_t>();
        } else if (key == "alpha") {
            cfg.alpha = val.get<double>();
        } else if (key == "t_max") {
            cfg.t_max = val.get<double>();
        } else if (key == "depth") {
            cfg.depth = val.get<int>();
        } else if (key == "grid_depth") {
            cfg.grid_depth = val.get<int>();
        } else if (key == "sigma") {
            cfg.sigma = val.get<double>();
        } else if (key == "n_param") {
            cfg.n_param = val.get<int>();
        } else if (key == "base") {
            cfg.base = base_from_name(val.get<std::string>());
        } else if (key == "normalization") {
            cfg.normalization = normalization_from_name(val.get<std::string>());
        } else if (key == "m") {
            cfg.m = val.get<std::size_t>();
        } else if (key == "tail_eps") {
            cfg.tail_eps = val.get<double>();
        } else if (key == "permutations") {
            cfg.permutations = val.get<std::size_t>();
        } else if (key == "threads") {
            cfg.threads = val.get<unsigned>();
        } else if (key == "format") {
            const std::string f = val.get<std::string>();
            if (f == "csv")
                cfg.format = ReportFormat::csv;
            else if (f == "json")
                cfg.format = ReportFormat::json;
            else
                throw std::invalid_argument("config: unknown format " + f);
        } else if (key == "out") {
            cfg.out = val.get<std::string>();
        } else {
            throw std::invalid_argument("config: unknown key " + key);
        }
    }
}

} // namespace detail

inline CliResult parse_cli(const std::vector<std::string>& args,
                           std::ostream& err = std::cerr) {
    CLI::App app{"Numerical verification lab for the hyperbolic secant law"};
    app.require_subcommand(1);

    struct Raw {
        std::string dist = "sech";
        double scale = 1.0;
        std::size_t n = 100000;
        std::size_t trials = 20;
        std::optional<std::uint64_t> seed;
        double alpha = 0.0; // resolved per subcommand if untouched
        std::string out;
        std::string format = "csv";
        unsigned threads = 1;
        std::string config_path;
        double t_max = 4.0;
        int depth = 30;
        int grid_depth = 12;
        double sigma = kPi / 2.0;
        int n_param = 64;
        std::string base = "coin";
        std::string normalization = "inv-n";
        std::size_t m = 100000;
        double tail_eps = 1e-12;
        std::size_t permutations = 200;
    } raw;

    const std::vector<std::string> names = {"theorem1", "theorem2", "random-sum",
                                            "fixed-point", "dist", "index"};
    const std::vector<std::string> briefs = {
        "two-sample test of the half-sum mixture identity",
        "independence test of the paired linear forms",
        "distributional limit of normalized random-index sums",
        "doubling solver for the fixed-point transform equation",
        "density / distribution / transform table plus sampler check",
        "exact law of the random index"};
    const std::vector<ExperimentKind> kinds = {
        ExperimentKind::theorem1, ExperimentKind::theorem2, ExperimentKind::random_sum,
        ExperimentKind::fixed_point, ExperimentKind::dist, ExperimentKind::index};
    std::vector<CLI::App*> subs;
    std::vector<CLI::Option*> alpha_opts;
    for (std::size_t si = 0; si < names.size(); ++si) {
        const std::string& name = names[si];
        CLI::App* sub = app.add_subcommand(name, briefs[si]);
        sub->add_option("--dist", raw.dist, "sech | normal | laplace | uniform");
        sub->add_option("--scale", raw.scale, "scale of the sampled law");
        sub->add_option("--n", raw.n, "samples per trial");
        sub->add_option("--trials", raw.trials, "number of seeded trials");
        sub->add_option("--seed", raw.seed, "master seed (mandatory, 64-bit)");
        alpha_opts.push_back(sub->add_option("--alpha", raw.alpha, "test level"));
        sub->add_option("--out", raw.out, "report file (default: stdout)");
        sub->add_option("--format", raw.format, "csv | json");
        sub->add_option("--threads", raw.threads, "worker threads for trials");
        sub->add_option("--config", raw.config_path, "JSON config file (flags win)");
        if (name == "fixed-point") {
            sub->add_option("--t-max", raw.t_max, "right end of the grid");
            sub->add_option("--depth", raw.depth, "seed depth of the doubling solver");
            sub->add_option("--sigma", raw.sigma, "curvature of the seed (std dev)");
            sub->add_option("--grid-depth", raw.grid_depth, "output grid: 2^d nodes");
        }
        if (name == "random-sum") {
            sub->add_option("--n-param", raw.n_param, "index order n");
            sub->add_option("--base", raw.base, "coin | uniform | normal");
            sub->add_option("--normalization", raw.normalization, "inv-n | inv-sqrt-n");
            sub->add_option("--m", raw.m, "sums per trial");
        }
        if (name == "theorem2") {
            sub->add_option("--permutations", raw.permutations, "permutation count");
        }
        if (name == "index") {
            sub->add_option("--n-param", raw.n_param, "index order n");
            sub->add_option("--tail-eps", raw.tail_eps, "stop once tail mass is below");
        }
        subs.push_back(sub);
    }

    std::vector<const char*> argv;
    argv.push_back("sechlab");
    for (const auto& a : args) argv.push_back(a.c_str());

    CliResult res;
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        res.exit_code = 0;
        return res;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        res.exit_code = 2;
        return res;
    }

    try {
        std::size_t chosen = names.size();
        for (std::size_t i = 0; i < subs.size(); ++i)
            if (subs[i]->parsed()) chosen = i;
        ExperimentConfig cfg;
        cfg.experiment = kinds[chosen];
        cfg.alpha = 0.0; // sentinel: resolved after the merge below
        if (!raw.config_path.empty())
            detail::apply_config_file(raw.config_path, names[chosen], cfg);

        // flags override config-file values; untouched flags keep defaults
        const CLI::App* sub = subs[chosen];
        auto given = [&](const std::string& flag) {
            const CLI::Option* o = sub->get_option_no_throw(flag);
            return o != nullptr && o->count() > 0;
        };
        if (given("--dist") || raw.config_path.empty()) cfg.dist = dist_from_name(raw.dist);
        if (given("--scale") || raw.config_path.empty()) cfg.scale = raw.scale;
        if (given("--n") || raw.config_path.empty()) cfg.n_samples = raw.n;
        if (given("--trials") || raw.config_path.empty()) cfg.trials = raw.trials;
        if (raw.seed.has_value()) cfg.seed = raw.seed;
        if (given("--out") || raw.config_path.empty()) cfg.out = raw.out;
        if (given("--threads") || raw.config_path.empty()) cfg.threads = raw.threads;
        if (given("--format") || raw.config_path.empty()) {
            if (raw.format == "csv")
                cfg.format = ReportFormat::csv;
            else if (raw.format == "json")
                cfg.format = ReportFormat::json;
            else
                throw std::invalid_argument("unknown format: " + raw.format);
        }
        if (given("--t-max") || raw.config_path.empty()) cfg.t_max = raw.t_max;
        if (given("--depth") || raw.config_path.empty()) cfg.depth = raw.depth;
        if (given("--grid-depth") || raw.config_path.empty()) cfg.grid_depth = raw.grid_depth;
        if (given("--sigma") || raw.config_path.empty()) cfg.sigma = raw.sigma;
        if (given("--n-param") || raw.config_path.empty()) cfg.n_param = raw.n_param;
        if (given("--base") || raw.config_path.empty()) cfg.base = base_from_name(raw.base);
        if (given("--normalization") || raw.config_path.empty())
            cfg.normalization = normalization_from_name(raw.normalization);
        if (given("--m") || raw.config_path.empty()) cfg.m = raw.m;
        if (given("--tail-eps") || raw.config_path.empty()) cfg.tail_eps = raw.tail_eps;
        if (given("--permutations") || raw.config_path.empty())
            cfg.permutations = raw.permutations;
        if (given("--alpha")) {
            cfg.alpha = raw.alpha;
        } else if (cfg.alpha == 0.0) {
            // calibrated defaults: 0.05 for the independence test, 0.01 for
            // the distributional KS experiments
            cfg.alpha = cfg.experiment == ExperimentKind::theorem2 ? 0.05 : 0.01;
        }

        validate_config(cfg);
        res.config = cfg;
        res.proceed = true;
        return res;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        res.exit_code = 2;
        return res;
    }
}

} // namespace sechlab
