// tsmeta command-line tool: evaluate, features, run, report.

#include "tsmeta/commands.hpp"
#include "tsmeta/error.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace tsmeta;

struct Flags {
    std::optional<std::string> config;
    std::optional<std::string> data;
    std::optional<std::string> format;
    std::optional<int> horizon;
    std::optional<int> origins;
    std::optional<int> step;
    std::optional<int> season;
    std::optional<int> season2;
    std::optional<double> test_ratio;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> split_seed;
    std::optional<std::vector<std::string>> methods;
    std::optional<std::vector<std::string>> pools;
    std::optional<std::vector<std::string>> measures;
    std::optional<std::vector<std::string>> reductions;
    std::optional<std::vector<std::string>> learners;
    std::optional<int> folds;
    std::optional<int> repeats;
    std::optional<unsigned> threads;
    std::optional<std::string> out;
    std::string log_level = "info";
    bool no_cache = false;
};

void add_flags(CLI::App& app, Flags& f) {
    app.add_option("--config", f.config, "JSON config file; flags override its values");
    app.add_option("--data", f.data, "input CSV");
    app.add_option("--format", f.format, "long_csv or wide_csv");
    app.add_option("--horizon", f.horizon, "forecast horizon");
    app.add_option("--origins", f.origins, "number of rolling origins");
    app.add_option("--step", f.step, "origin step (0 = horizon)");
    app.add_option("--season", f.season, "seasonal period");
    app.add_option("--season2", f.season2, "second seasonal period (0 = none)");
    app.add_option("--test-ratio", f.test_ratio, "share of series held out");
    app.add_option("--seed", f.seed, "learner and cross-validation seed");
    app.add_option("--split-seed", f.split_seed, "train/test split seed");
    app.add_option("--methods", f.methods, "forecasters to evaluate")->delimiter(',');
    app.add_option("--pools", f.pools, "top4, top6, top6_snaive, basic")->delimiter(',');
    app.add_option("--measures", f.measures, "smape, mase")->delimiter(',');
    app.add_option("--reductions", f.reductions, "raw, feature_selection, pca")->delimiter(',');
    app.add_option("--learners", f.learners, "decision_tree, random_forest, treebag, gbt, mlp, svm")->delimiter(',');
    app.add_option("--folds", f.folds, "cross-validation folds");
    app.add_option("--repeats", f.repeats, "cross-validation repeats");
    app.add_option("--threads", f.threads, "worker threads (0 = hardware)");
    app.add_option("--out", f.out, "output directory (default $TSMETA_OUT or ./out)");
    app.add_option("--log-level", f.log_level, "trace, debug, info, warn, error, off");
    app.add_flag("--no-cache", f.no_cache, "recompute instead of reusing cached phases");
}

template <class T, class Parse>
std::vector<T> parse_names(const std::vector<std::string>& names, Parse parse) {
    std::vector<T> out;
    for (const auto& n : names) {
        out.push_back(parse(n));
    }
    return out;
}

RunConfig resolve(const Flags& f) {
    RunConfig c;
    c.out = default_output_dir();
    if (f.config) {
        std::ifstream in(*f.config);
        if (!in) {
            throw ConfigError("cannot open config file " + *f.config);
        }
        std::ostringstream text;
        text << in.rdbuf();
        c = config_from_json(text.str(), c);
    }
    if (f.data) c.data = *f.data;
    if (f.format) c.format = parse_csv_format(*f.format);
    if (f.horizon) c.horizon = *f.horizon;
    if (f.origins) c.origins = *f.origins;
    if (f.step) c.step = *f.step;
    if (f.season) c.season = *f.season;
    if (f.season2) c.season2 = *f.season2;
    if (f.test_ratio) c.test_ratio = *f.test_ratio;
    if (f.seed) c.seed = *f.seed;
    if (f.split_seed) c.split_seed = *f.split_seed;
    if (f.methods) c.methods = parse_names<MethodId>(*f.methods, parse_method);
    if (f.pools) c.pools = parse_names<PoolId>(*f.pools, parse_pool);
    if (f.measures) c.measures = parse_names<Measure>(*f.measures, parse_measure);
    if (f.reductions) c.reductions = parse_names<Reduction>(*f.reductions, parse_reduction);
    if (f.learners) c.learners = parse_names<LearnerKind>(*f.learners, parse_learner);
    if (f.folds) c.folds = *f.folds;
    if (f.repeats) c.repeats = *f.repeats;
    if (f.threads) c.threads = *f.threads;
    if (f.out) c.out = *f.out;
    if (f.no_cache) c.use_cache = false;
    validate(c);
    return c;
}

int fail(const char* kind, const std::string& message, int code) {
    nlohmann::json j{{"error", {{"kind", kind}, {"message", message}}}};
    std::cerr << j.dump() << '\n';
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meta-learning recommender for forecasting model selection"};
    app.require_subcommand(1);
    Flags flags;
    std::string chosen;
    for (const char* name : {"evaluate", "features", "run", "report"}) {
        auto* sub = app.add_subcommand(name);
        add_flags(*sub, flags);
        sub->callback([&chosen, name] { chosen = name; });
    }
    app.get_subcommand("evaluate")->description("forecast every series over rolling origins and rank the methods");
    app.get_subcommand("features")->description("extract the meta-features of every series");
    app.get_subcommand("run")->description("evaluate, extract features and run the meta-learning experiment");
    app.get_subcommand("report")->description("summarise report.json from a previous run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("config", e.what(), 1);
    }

    try {
        const auto level = spdlog::level::from_str(flags.log_level);
        if (level == spdlog::level::off && flags.log_level != "off") {
            throw ConfigError("unknown log level '" + flags.log_level + "'");
        }
        spdlog::set_default_logger(spdlog::stderr_color_mt("tsmeta"));
        spdlog::set_level(level);
        const RunConfig config = resolve(flags);
        if (chosen == "evaluate") {
            const auto result = cmd_evaluate(config);
            std::cout << fmt::format("{} records, {} series skipped{}\n", result.records.size(), result.skipped.size(),
                                     result.cache_hit ? " (cached)" : "");
        } else if (chosen == "features") {
            const auto result = cmd_features(config);
            std::cout << fmt::format("{} series, {} constant columns{}\n", result.matrix.series_ids.size(),
                                     result.matrix.constant_names().size(), result.cache_hit ? " (cached)" : "");
        } else if (chosen == "run") {
            const auto report = cmd_run(config);
            std::cout << fmt::format("{} variants, {} learner results written to {}\n", report.variants.size(),
                                     report.learners.size(), config.out.string());
        } else {
            std::cout << cmd_report(config);
        }
    } catch (const Error& e) {
        switch (e.kind()) {
        case ErrorKind::config: return fail("config", e.what(), 1);
        case ErrorKind::data: return fail("data", e.what(), 2);
        default: return fail("internal", e.what(), 3);
        }
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 3);
    }
    return 0;
}
