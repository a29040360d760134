#include "tsmeta/commands.hpp"

#include "json.hpp"
#include "tsmeta/error.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace tsmeta {

namespace {

using nlohmann::json;

constexpr std::string_view cache_version = "tsmeta-cache-1";

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw DataError("cannot write " + path.string());
    }
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    std::string hex;
    for (unsigned int i = 0; i < length; ++i) {
        hex += fmt::format("{:02x}", digest[i]);
    }
    return hex;
}

/// Hash of the data file plus the settings that influence a phase's output.
std::string cache_key(const RunConfig& config, const json& settings) {
    return sha256_hex(std::string(cache_version) + '\n' + settings.dump() + '\n' + read_file(config.data));
}

json evaluate_settings(const RunConfig& c) {
    std::vector<std::string> methods;
    for (MethodId m : c.methods) {
        methods.emplace_back(to_string(m));
    }
    return {{"phase", "evaluate"},  {"format", to_string(c.format)},  {"horizon", c.horizon},
            {"origins", c.origins}, {"step", c.step},                 {"season", c.season},
            {"season2", c.season2}, {"methods", methods},             {"mapa_max_level", c.forecaster.mapa_max_level},
            {"restarts", c.forecaster.restarts}, {"forecaster_seed", c.forecaster.seed}};
}

json feature_settings(const RunConfig& c) {
    return {{"phase", "features"}, {"format", to_string(c.format)}, {"season", c.season}, {"season2", c.season2}};
}

template <class T, class Parse>
std::vector<T> parse_list(const json& value, Parse parse, const char* key) {
    if (!value.is_array()) {
        throw ConfigError(std::string("config key '") + key + "' must be a list");
    }
    std::vector<T> out;
    for (const auto& item : value) {
        out.push_back(parse(item.get<std::string>()));
    }
    return out;
}

template <class T>
std::vector<std::string> names_of(const std::vector<T>& items) {
    std::vector<std::string> out;
    for (const auto& i : items) {
        out.emplace_back(to_string(i));
    }
    return out;
}

std::vector<std::string> measure_files(const std::vector<RankingTable>& rankings) {
    std::vector<std::string> out;
    for (const auto& t : rankings) {
        out.push_back("ranking_" + std::string(to_string(t.measure)) + ".csv");
    }
    return out;
}

} // namespace

void validate(const RunConfig& c) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) {
            throw ConfigError(what);
        }
    };
    require(c.horizon > 0, "horizon must be positive");
    require(c.origins > 0, "origins must be positive");
    require(c.step >= 0, "step must be non-negative (0 selects the horizon)");
    require(c.season > 0, "season must be positive");
    require(c.season2 >= 0, "season2 must be non-negative");
    require(c.test_ratio > 0.0 && c.test_ratio < 1.0, "test_ratio must lie in (0, 1)");
    require(c.folds >= 2, "folds must be at least 2");
    require(c.repeats >= 1, "repeats must be positive");
    require(!c.methods.empty(), "methods must not be empty");
    require(!c.pools.empty(), "pools must not be empty");
    require(!c.measures.empty(), "measures must not be empty");
    require(!c.reductions.empty(), "reductions must not be empty");
    require(!c.learners.empty(), "learners must not be empty");
    require(c.reduction.top_k > 0, "top_k must be positive");
    require(c.reduction.oner_bins > 0, "oner_bins must be positive");
    require(c.reduction.pca_threshold >= 0.0 && c.reduction.pca_threshold <= 1.0,
            "pca_threshold must lie in [0, 1]");
    require(c.forecaster.mapa_max_level > 0, "mapa_max_level must be positive");
    require(c.forecaster.restarts > 0, "restarts must be positive");
    require(!c.out.empty(), "output directory must not be empty");
    for (const auto& name : c.reduction.named) {
        feature_index(name);
    }
}

RunConfig config_from_json(const std::string& text, RunConfig base) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    RunConfig& c = base;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "data") c.data = value.get<std::string>();
            else if (key == "format") c.format = parse_csv_format(value.get<std::string>());
            else if (key == "horizon") c.horizon = value.get<int>();
            else if (key == "origins") c.origins = value.get<int>();
            else if (key == "step") c.step = value.get<int>();
            else if (key == "season") c.season = value.get<int>();
            else if (key == "season2") c.season2 = value.get<int>();
            else if (key == "test_ratio") c.test_ratio = value.get<double>();
            else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "split_seed") c.split_seed = value.get<std::uint64_t>();
            else if (key == "methods") c.methods = parse_list<MethodId>(value, parse_method, "methods");
            else if (key == "pools") c.pools = parse_list<PoolId>(value, parse_pool, "pools");
            else if (key == "measures") c.measures = parse_list<Measure>(value, parse_measure, "measures");
            else if (key == "reductions") c.reductions = parse_list<Reduction>(value, parse_reduction, "reductions");
            else if (key == "learners") c.learners = parse_list<LearnerKind>(value, parse_learner, "learners");
            else if (key == "folds") c.folds = value.get<int>();
            else if (key == "repeats") c.repeats = value.get<int>();
            else if (key == "feature_set") {
                if (value.is_string() && value.get<std::string>() == "paper12") {
                    c.reduction.named.assign(paper12_features.begin(), paper12_features.end());
                } else if (value.is_string() && value.get<std::string>() == "top_k") {
                    c.reduction.named.clear();
                } else {
                    c.reduction.named = value.get<std::vector<std::string>>();
                }
            }
            else if (key == "top_k") c.reduction.top_k = value.get<std::size_t>();
            else if (key == "oner_bins") c.reduction.oner_bins = value.get<int>();
            else if (key == "pca_threshold") c.reduction.pca_threshold = value.get<double>();
            else if (key == "mapa_max_level") c.forecaster.mapa_max_level = value.get<int>();
            else if (key == "restarts") c.forecaster.restarts = value.get<int>();
            else if (key == "forecaster_seed") c.forecaster.seed = value.get<std::uint64_t>();
            else if (key == "threads") c.threads = value.get<unsigned>();
            else if (key == "cache") c.use_cache = value.get<bool>();
            else if (key == "out") c.out = value.get<std::string>();
            else throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config value: ") + e.what());
    }
    return c;
}

std::string config_to_json(const RunConfig& c) {
    json j{{"data", c.data.string()},
           {"format", to_string(c.format)},
           {"horizon", c.horizon},
           {"origins", c.origins},
           {"step", c.step},
           {"season", c.season},
           {"season2", c.season2},
           {"test_ratio", c.test_ratio},
           {"seed", c.seed},
           {"split_seed", c.split_seed},
           {"methods", names_of(c.methods)},
           {"pools", names_of(c.pools)},
           {"measures", names_of(c.measures)},
           {"reductions", names_of(c.reductions)},
           {"learners", names_of(c.learners)},
           {"folds", c.folds},
           {"repeats", c.repeats},
           {"top_k", c.reduction.top_k},
           {"oner_bins", c.reduction.oner_bins},
           {"pca_threshold", c.reduction.pca_threshold},
           {"mapa_max_level", c.forecaster.mapa_max_level},
           {"restarts", c.forecaster.restarts},
           {"forecaster_seed", c.forecaster.seed},
           {"threads", c.threads},
           {"cache", c.use_cache},
           {"out", c.out.string()}};
    if (c.reduction.named.empty()) {
        j["feature_set"] = "top_k";
    } else {
        j["feature_set"] = c.reduction.named;
    }
    return j.dump(2);
}

std::filesystem::path default_output_dir() {
    const char* env = std::getenv("TSMETA_OUT");
    return env != nullptr && *env != '\0' ? std::filesystem::path(env) : std::filesystem::path("out");
}

Collection load_prepared(const RunConfig& config) {
    if (config.data.empty()) {
        throw ConfigError("no data file given");
    }
    auto collection = load_collection(config.data, config.format, config.season);
    for (auto& ts : collection) {
        ts.seasonal_period2 = config.season2;
        ts = impute_missing(ts);
    }
    return collection;
}

EvaluateResult cmd_evaluate(const RunConfig& config) {
    validate(config);
    const auto collection = load_prepared(config);
    EvaluateResult result;
    OriginConfig origins{config.horizon, config.origins, config.step};
    Collection usable;
    const auto need = rolling_origin_min_length(config.horizon, config.origins, origins.effective_step(), config.season);
    for (const auto& ts : collection) {
        if (ts.size() < need) {
            spdlog::warn("series {} has {} observations, {} needed; skipped", ts.id, ts.size(), need);
            result.skipped.push_back(ts.id);
        } else {
            usable.push_back(ts);
        }
    }
    if (usable.empty()) {
        throw DataError("no series is long enough for the requested horizon and origins");
    }

    const auto cache_file = config.out / "cache" / ("evaluate-" + cache_key(config, evaluate_settings(config)) + ".csv");
    if (config.use_cache && std::filesystem::exists(cache_file)) {
        result.records = read_records_csv(cache_file);
        result.cache_hit = true;
        spdlog::info("evaluation cache hit: {}", cache_file.string());
    } else {
        result.records = evaluate_pool(usable, config.methods, origins, config.forecaster, nullptr, config.threads);
        if (config.use_cache) {
            write_records_csv(cache_file, result.records);
        }
    }
    write_records_csv(config.out / "records.csv", result.records);
    for (Measure m : all_measures) {
        result.rankings.push_back(rank_methods(result.records, m));
    }
    const auto files = measure_files(result.rankings);
    for (std::size_t i = 0; i < files.size(); ++i) {
        write_ranking_csv(config.out / files[i], result.rankings[i]);
    }
    return result;
}

FeaturesResult cmd_features(const RunConfig& config) {
    validate(config);
    const auto collection = load_prepared(config);
    FeaturesResult result;
    const auto cache_file = config.out / "cache" / ("features-" + cache_key(config, feature_settings(config)) + ".csv");
    if (config.use_cache && std::filesystem::exists(cache_file)) {
        result.matrix = read_feature_csv(cache_file);
        result.cache_hit = true;
        spdlog::info("feature cache hit: {}", cache_file.string());
    } else {
        result.matrix = feature_matrix(collection, config.threads);
        if (config.use_cache) {
            write_feature_csv(cache_file, result.matrix);
        }
    }
    write_feature_csv(config.out / "features.csv", result.matrix);
    json report{{"constant_columns", result.matrix.constant_names()}};
    std::vector<std::string> failed;
    for (std::size_t i = 0; i < result.matrix.series_ids.size(); ++i) {
        if (result.matrix.failed[i]) {
            failed.push_back(result.matrix.series_ids[i]);
        }
    }
    report["failed_series"] = failed;
    write_file(config.out / "constant_columns.json", report.dump(2) + "\n");
    return result;
}

ExperimentReport cmd_run(const RunConfig& config) {
    validate(config);
    const auto evaluation = cmd_evaluate(config);
    auto features = cmd_features(config).matrix;

    // keep the series that have records
    std::set<std::string> evaluated;
    for (const auto& r : evaluation.records) {
        evaluated.insert(r.series_id);
    }
    FeatureMatrix kept;
    for (std::size_t i = 0; i < features.series_ids.size(); ++i) {
        if (evaluated.count(features.series_ids[i])) {
            kept.series_ids.push_back(features.series_ids[i]);
            kept.rows.push_back(features.rows[i]);
            kept.failed.push_back(features.failed[i]);
        }
    }
    kept.constant = constant_columns(kept.rows);

    ExperimentConfig experiment;
    experiment.pools = config.pools;
    experiment.measures = config.measures;
    experiment.reductions = config.reductions;
    experiment.learners = config.learners;
    experiment.test_ratio = config.test_ratio;
    experiment.split_seed = config.split_seed;
    experiment.cv = {config.folds, config.repeats, config.seed, config.threads};
    experiment.reduction = config.reduction;

    auto report = run_experiment(kept, evaluation.records, experiment);
    write_file(config.out / "report.json", report_to_json(report) + "\n");
    write_file(config.out / "run_config.json", config_to_json(config) + "\n");
    write_tables(report, config.out);
    return report;
}

std::string cmd_report(const RunConfig& config) {
    const auto path = config.out / "report.json";
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw DataError("invalid report " + path.string() + ": " + e.what());
    }
    auto value = [](const json& v) { return v.is_number() ? fmt::format("{:.6f}", v.get<double>()) : std::string("NA"); };
    std::string out;
    try {
        out += fmt::format("train series: {}, test series: {}\n", j.at("train_ids").size(), j.at("test_ids").size());
        for (const auto& pool : j.at("pools")) {
            out += fmt::format("\npool {}: {}\n", pool.at("id").get<std::string>(),
                               fmt::join(pool.at("members").get<std::vector<std::string>>(), ", "));
            for (const auto& b : j.at("boundaries")) {
                if (b.at("pool") != pool.at("id")) {
                    continue;
                }
                const auto measure = b.at("measure").get<std::string>();
                std::string best_ind = "NA";
                double best_ind_error = INFINITY;
                for (const auto& i : j.at("individuals")) {
                    if (i.at("pool") == pool.at("id") && i.at("measure") == measure && i.at("test_error").is_number() &&
                        i.at("test_error").get<double>() < best_ind_error) {
                        best_ind_error = i.at("test_error").get<double>();
                        best_ind = i.at("method").get<std::string>();
                    }
                }
                out += fmt::format("  {}: boundary {}, best individual {} {}\n", measure, value(b.at("value")),
                                   best_ind, std::isfinite(best_ind_error) ? fmt::format("{:.6f}", best_ind_error) : "NA");
                for (const auto& r : j.at("learners")) {
                    if (r.at("pool") == pool.at("id") && r.at("measure") == measure) {
                        out += fmt::format("    {:<14} {:<18} {}\n", r.at("learner").get<std::string>(),
                                           r.at("reduction").get<std::string>(), value(r.at("test_error")));
                    }
                }
            }
        }
        if (!j.at("decreasing_pattern").empty()) {
            out += "\nlearners with a strictly decreasing error over top4, top6, top6_snaive:\n";
            for (const auto& p : j.at("decreasing_pattern")) {
                out += fmt::format("  {} {}: {}\n", p.at("measure").get<std::string>(),
                                   p.at("reduction").get<std::string>(), p.at("learners").get<int>());
            }
        }
    } catch (const json::exception& e) {
        throw DataError("malformed report " + path.string() + ": " + e.what());
    }
    return out;
}

} // namespace tsmeta
