#include "tsmeta/pipeline.hpp"

#include "csv.hpp"
#include "json.hpp"
#include "tsmeta/error.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

namespace tsmeta {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<std::string_view, 4> pool_names{"top4", "top6", "top6_snaive", "basic"};
constexpr std::array<std::string_view, 3> reduction_names{"raw", "feature_selection", "pca"};

/// (series, method, measure) -> record lookup.
class RecordIndex {
public:
    explicit RecordIndex(std::span<const EvaluationRecord> records) {
        for (const auto& r : records) {
            index_[key(r.series_id, r.method, r.measure)] = &r;
        }
    }

    const EvaluationRecord& at(const std::string& id, MethodId m, Measure measure) const {
        const auto it = index_.find(key(id, m, measure));
        if (it == index_.end()) {
            throw DataError("no " + std::string(to_string(measure)) + " record for " + std::string(to_string(m)) +
                            " on series '" + id + "'");
        }
        return *it->second;
    }

    /// Best pool member on a series, or nothing when every member failed.
    std::optional<MethodId> best(const std::string& id, std::span<const MethodId> pool, Measure measure) const {
        std::vector<MethodId> members(pool.begin(), pool.end());
        std::sort(members.begin(), members.end());
        std::optional<MethodId> out;
        double best_value = 0.0;
        for (MethodId m : members) {
            const auto& r = at(id, m, measure);
            if (!r.failed && (!out || r.value < best_value)) {
                out = m;
                best_value = r.value;
            }
        }
        return out;
    }

private:
    static std::string key(const std::string& id, MethodId m, Measure measure) {
        return id + '\x1f' + std::to_string(static_cast<int>(m)) + '\x1f' + std::to_string(static_cast<int>(measure));
    }
    std::unordered_map<std::string, const EvaluationRecord*> index_;
};

double charged_value(const RecordIndex& index, const std::string& id, std::span<const MethodId> pool,
                     MethodId chosen, Measure measure) {
    const auto& r = index.at(id, chosen, measure);
    if (!r.failed) {
        return r.value;
    }
    double worst = -std::numeric_limits<double>::infinity();
    for (MethodId m : pool) {
        const auto& other = index.at(id, m, measure);
        if (!other.failed) {
            worst = std::max(worst, other.value);
        }
    }
    if (!std::isfinite(worst)) {
        throw DataError("every pool member failed on series '" + id + "'");
    }
    return worst;
}

Eigen::MatrixXd gather(const FeatureMatrix& features, const std::vector<std::size_t>& rows,
                       const std::vector<std::size_t>& columns) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = features.rows[rows[i]].values[columns[j]];
        }
    }
    return x;
}

Eigen::MatrixXd pick_columns(const Eigen::MatrixXd& x, const std::vector<std::string>& all,
                             const std::vector<std::string>& chosen) {
    Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(chosen.size()));
    for (std::size_t j = 0; j < chosen.size(); ++j) {
        const auto pos = std::find(all.begin(), all.end(), chosen[j]) - all.begin();
        out.col(static_cast<Eigen::Index>(j)) = x.col(pos);
    }
    return out;
}

std::vector<std::string> choose_features(const FeatureWeights& weights, const ReductionConfig& config) {
    if (config.named.empty()) {
        return select_top_k(weights, config.top_k);
    }
    std::vector<std::string> chosen;
    std::vector<std::string> missing;
    for (const auto& name : config.named) {
        if (std::find(weights.names.begin(), weights.names.end(), name) != weights.names.end()) {
            if (std::find(chosen.begin(), chosen.end(), name) == chosen.end()) {
                chosen.push_back(name);
            }
        } else {
            feature_index(name);  // rejects names that are not features at all
            missing.push_back(name);
        }
    }
    if (!missing.empty()) {
        for (const auto& name : select_top_k(weights, weights.names.size())) {
            if (chosen.size() >= config.named.size()) {
                break;
            }
            if (std::find(chosen.begin(), chosen.end(), name) == chosen.end()) {
                chosen.push_back(name);
            }
        }
        spdlog::info("features constant on the training rows replaced by OneR ranking: {}", fmt::join(missing, ", "));
    }
    return chosen;
}

std::string fixed6(double v) { return std::isfinite(v) ? fmt::format("{:.6f}", v) : "NA"; }

std::ofstream open_output(const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    return out;
}

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

} // namespace

std::string_view to_string(PoolId id) { return pool_names.at(static_cast<std::size_t>(id)); }

PoolId parse_pool(std::string_view name) {
    for (std::size_t i = 0; i < pool_names.size(); ++i) {
        if (pool_names[i] == name) {
            return all_pools[i];
        }
    }
    throw ConfigError("unknown pool '" + std::string(name) + "'");
}

std::string_view to_string(Reduction r) { return reduction_names.at(static_cast<std::size_t>(r)); }

Reduction parse_reduction(std::string_view name) {
    if (name == "fs") {
        return Reduction::feature_selection;
    }
    for (std::size_t i = 0; i < reduction_names.size(); ++i) {
        if (reduction_names[i] == name) {
            return all_reductions[i];
        }
    }
    throw ConfigError("unknown reduction '" + std::string(name) + "'");
}

std::vector<PoolSpec> build_pools(const RankingTable& ranking) {
    std::vector<MethodId> advanced;
    for (const auto& row : ranking.rows) {
        if (row.method != MethodId::naive && row.method != MethodId::snaive && row.method != MethodId::sma) {
            advanced.push_back(row.method);
        }
    }
    if (advanced.size() < 6) {
        throw ConfigError("the ranking has " + std::to_string(advanced.size()) +
                          " advanced methods; the top pools need at least 6");
    }
    std::vector<PoolSpec> pools;
    pools.push_back({PoolId::top4, {advanced.begin(), advanced.begin() + 4}});
    pools.push_back({PoolId::top6, {advanced.begin(), advanced.begin() + 6}});
    auto with_snaive = pools.back().members;
    with_snaive.push_back(MethodId::snaive);
    pools.push_back({PoolId::top6_snaive, with_snaive});
    pools.push_back({PoolId::basic, {MethodId::ets_ann, MethodId::ets_ana, MethodId::ets_aan, MethodId::ets_aaa}});
    return pools;
}

std::string variant_name(const InputVariant& v) {
    return fmt::format("{}/{}/{}", to_string(v.pool.id), to_string(v.measure), to_string(v.reduction));
}

std::vector<InputVariant> build_inputs(const FeatureMatrix& features, std::span<const EvaluationRecord> records,
                                       std::span<const PoolSpec> pools, std::span<const Measure> measures,
                                       std::span<const Reduction> reductions, const CollectionSplit& split,
                                       const ReductionConfig& config) {
    const RecordIndex index(records);
    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < features.series_ids.size(); ++i) {
        row_of[features.series_ids[i]] = i;
    }
    auto usable = [&](const std::vector<std::string>& ids) {
        std::vector<std::string> out;
        for (const auto& id : ids) {
            const auto it = row_of.find(id);
            if (it == row_of.end()) {
                throw DataError("no feature row for series '" + id + "'");
            }
            if (!features.failed.empty() && features.failed[it->second]) {
                spdlog::warn("series {} has no features and is left out of the meta-datasets", id);
                continue;
            }
            out.push_back(id);
        }
        return out;
    };
    const auto train_pool = usable(split.train_ids);
    const auto test_pool = usable(split.test_ids);

    std::vector<InputVariant> variants;
    for (const auto& pool : pools) {
        for (Measure measure : measures) {
            // labels; series on which every member failed are dropped
            auto label = [&](const std::vector<std::string>& ids, std::vector<std::string>& kept,
                             std::vector<std::size_t>& rows, std::vector<int>& labels) {
                for (const auto& id : ids) {
                    const auto best = index.best(id, pool.members, measure);
                    if (!best) {
                        spdlog::warn("every {} member failed on series {} for {}; series dropped", to_string(pool.id),
                                     id, to_string(measure));
                        continue;
                    }
                    kept.push_back(id);
                    rows.push_back(row_of.at(id));
                    labels.push_back(registry_rank(*best));
                }
            };
            std::vector<std::string> train_ids, test_ids;
            std::vector<std::size_t> train_rows, test_rows;
            std::vector<int> train_labels, test_labels;
            label(train_pool, train_ids, train_rows, train_labels);
            label(test_pool, test_ids, test_rows, test_labels);

            std::vector<FeatureVector> train_vectors;
            for (auto r : train_rows) {
                train_vectors.push_back(features.rows[r]);
            }
            const auto constant = constant_columns(train_vectors);
            std::vector<std::size_t> active;
            std::vector<std::string> active_names;
            for (std::size_t j = 0; j < feature_count; ++j) {
                if (!constant[j]) {
                    active.push_back(j);
                    active_names.emplace_back(feature_names[j]);
                }
            }
            const Eigen::MatrixXd raw_train = gather(features, train_rows, active);
            const Eigen::MatrixXd raw_test = gather(features, test_rows, active);

            std::vector<Reduction> wanted;
            if (pool.id == PoolId::basic) {
                wanted.push_back(Reduction::raw);
            } else {
                wanted.assign(reductions.begin(), reductions.end());
            }
            for (Reduction reduction : wanted) {
                InputVariant v;
                v.pool = pool;
                v.measure = measure;
                v.reduction = reduction;
                v.train_ids = train_ids;
                v.test_ids = test_ids;
                v.train.labels = train_labels;
                v.test.labels = test_labels;
                for (MetaDataset* d : {&v.train, &v.test}) {
                    d->pool = std::string(to_string(pool.id));
                    d->measure = std::string(to_string(measure));
                    d->reduction = std::string(to_string(reduction));
                }
                switch (reduction) {
                case Reduction::raw:
                    v.train.x = raw_train;
                    v.test.x = raw_test;
                    v.train.feature_names = active_names;
                    break;
                case Reduction::feature_selection: {
                    v.weights = oner_weights(raw_train, train_labels, active_names, config.oner_bins);
                    const auto chosen = choose_features(*v.weights, config);
                    v.train.x = pick_columns(raw_train, active_names, chosen);
                    v.test.x = pick_columns(raw_test, active_names, chosen);
                    v.train.feature_names = chosen;
                    break;
                }
                case Reduction::pca: {
                    v.pca = fit_pca(raw_train, config.pca_threshold);
                    v.train.x = pca_transform(*v.pca, raw_train);
                    v.test.x = raw_test.rows() > 0 ? pca_transform(*v.pca, raw_test)
                                                   : Eigen::MatrixXd(0, v.pca->k);
                    for (int c = 0; c < v.pca->k; ++c) {
                        v.train.feature_names.push_back("pc" + std::to_string(c + 1));
                    }
                    break;
                }
                }
                v.test.feature_names = v.train.feature_names;
                variants.push_back(std::move(v));
            }
        }
    }
    return variants;
}

double selection_error(std::span<const EvaluationRecord> records, std::span<const MethodId> pool,
                       std::span<const std::string> ids, std::span<const MethodId> chosen, Measure measure) {
    if (ids.empty()) {
        throw ConfigError("cannot score an empty set of series");
    }
    if (ids.size() != chosen.size()) {
        throw ConfigError("one chosen method per series is required");
    }
    const RecordIndex index(records);
    double sum = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        sum += charged_value(index, ids[i], pool, chosen[i], measure);
    }
    return sum / static_cast<double>(ids.size());
}

double boundary(std::span<const EvaluationRecord> records, std::span<const MethodId> pool,
                std::span<const std::string> test_ids, Measure measure) {
    if (test_ids.empty()) {
        throw ConfigError("boundary needs a non-empty test set");
    }
    const RecordIndex index(records);
    std::vector<MethodId> best;
    for (const auto& id : test_ids) {
        const auto b = index.best(id, pool, measure);
        if (!b) {
            throw DataError("every pool member failed on series '" + id + "'");
        }
        best.push_back(*b);
    }
    return selection_error(records, pool, test_ids, best, measure);
}

std::vector<LabelShare> label_distribution(const InputVariant& variant) {
    std::vector<LabelShare> out;
    const auto n = static_cast<double>(variant.test.labels.size());
    for (MethodId m : variant.pool.members) {
        const auto count = std::count(variant.test.labels.begin(), variant.test.labels.end(), registry_rank(m));
        out.push_back({variant.pool.id, variant.measure, m, n > 0 ? 100.0 * static_cast<double>(count) / n : nan});
    }
    return out;
}

ExperimentReport run_experiment(const FeatureMatrix& features, std::span<const EvaluationRecord> records,
                                const ExperimentConfig& config) {
    if (!(config.test_ratio > 0.0 && config.test_ratio < 1.0)) {
        throw ConfigError("test_ratio must lie in (0, 1)");
    }
    ExperimentReport report;
    std::set<Measure> present;
    for (const auto& r : records) {
        present.insert(r.measure);
    }
    for (Measure m : present) {
        report.rankings.push_back(rank_methods(records, m));
    }
    if (!present.count(config.pool_ranking)) {
        throw DataError("no " + std::string(to_string(config.pool_ranking)) + " records to rank the pools");
    }
    for (const auto& pool : build_pools(rank_methods(records, config.pool_ranking))) {
        if (std::find(config.pools.begin(), config.pools.end(), pool.id) != config.pools.end()) {
            report.pools.push_back(pool);
        }
    }
    const auto split = split_collection(features.series_ids, config.test_ratio, config.split_seed);
    report.train_ids = split.train_ids;
    report.test_ids = split.test_ids;

    const auto variants =
        build_inputs(features, records, report.pools, config.measures, config.reductions, split, config.reduction);

    std::set<std::pair<PoolId, Measure>> summarized;
    for (const auto& v : variants) {
        report.variants.push_back({v.pool.id, v.measure, v.reduction, v.train.feature_names, v.train_ids.size(),
                                   v.test_ids.size()});
        if (summarized.insert({v.pool.id, v.measure}).second) {
            report.boundaries.push_back({v.pool.id, v.measure, boundary(records, v.pool.members, v.test_ids, v.measure)});
            for (MethodId m : v.pool.members) {
                const std::vector<MethodId> always(v.test_ids.size(), m);
                report.individuals.push_back(
                    {v.pool.id, v.measure, m, selection_error(records, v.pool.members, v.test_ids, always, v.measure)});
            }
            const auto shares = label_distribution(v);
            report.labels.insert(report.labels.end(), shares.begin(), shares.end());
        }
        for (LearnerKind kind : config.learners) {
            LearnerResult result;
            result.learner = kind;
            result.pool = v.pool.id;
            result.measure = v.measure;
            result.reduction = v.reduction;
            try {
                const auto model = train(kind, v.train, config.cv);
                result.cv_accuracy = model.cv_accuracy;
                result.hyperparameters = model.hyperparameters;
                const auto predicted = model.predict_rows(v.test.x);
                std::size_t correct = 0;
                for (std::size_t i = 0; i < predicted.size(); ++i) {
                    result.recommendations.push_back(static_cast<MethodId>(predicted[i]));
                    correct += predicted[i] == v.test.labels[i] ? 1 : 0;
                }
                result.test_accuracy = static_cast<double>(correct) / static_cast<double>(predicted.size());
                result.test_error =
                    selection_error(records, v.pool.members, v.test_ids, result.recommendations, v.measure);
                result.confusion = confusion_matrix(model, v.test);
            } catch (const std::exception& e) {
                result.error = e.what();
                result.test_error = nan;
                spdlog::warn("{} failed on {}: {}", to_string(kind), variant_name(v), e.what());
            }
            report.learners.push_back(std::move(result));
        }
        spdlog::info("finished {}", variant_name(v));
    }
    return report;
}

std::vector<Outperformance> outperformance_table(const ExperimentReport& report) {
    std::vector<Outperformance> out;
    for (const auto& r : report.learners) {
        if (!r.error.empty() || !std::isfinite(r.test_error)) {
            continue;
        }
        int beaten = 0, members = 0;
        for (const auto& ind : report.individuals) {
            if (ind.pool == r.pool && ind.measure == r.measure) {
                ++members;
                beaten += ind.test_error > r.test_error ? 1 : 0;
            }
        }
        // truncated like the reference tables (6 of 7 is 85, not 86)
        const int percent = members > 0 ? (100 * beaten) / members : 0;
        out.push_back({r.learner, r.pool, r.measure, r.reduction, percent});
    }
    return out;
}

std::vector<PatternCount> detect_decreasing_pattern(const ExperimentReport& report) {
    std::map<std::tuple<Measure, Reduction, LearnerKind, PoolId>, double> error;
    std::set<std::pair<Measure, Reduction>> cells;
    std::set<LearnerKind> learners;
    for (const auto& r : report.learners) {
        error[{r.measure, r.reduction, r.learner, r.pool}] = r.test_error;
        cells.insert({r.measure, r.reduction});
        learners.insert(r.learner);
    }
    std::vector<PatternCount> out;
    for (const auto& [measure, reduction] : cells) {
        bool covered = true;
        int count = 0;
        for (LearnerKind k : learners) {
            std::array<double, 3> e{};
            for (std::size_t p = 0; p < main_pools.size(); ++p) {
                const auto it = error.find({measure, reduction, k, main_pools[p]});
                if (it == error.end()) {
                    covered = false;
                    break;
                }
                e[p] = it->second;
            }
            if (!covered) {
                break;
            }
            count += e[0] > e[1] && e[1] > e[2] ? 1 : 0;  // NaN compares false
        }
        if (covered) {
            out.push_back({measure, reduction, count});
        }
    }
    return out;
}

std::string report_to_json(const ExperimentReport& report) {
    using nlohmann::json;
    json j;
    auto method_list = [](const std::vector<MethodId>& ms) {
        json a = json::array();
        for (MethodId m : ms) {
            a.push_back(std::string(to_string(m)));
        }
        return a;
    };
    j["rankings"] = json::array();
    for (const auto& t : report.rankings) {
        json rows = json::array();
        for (const auto& row : t.rows) {
            rows.push_back({{"method", std::string(to_string(row.method))}, {"mean_error", number(row.mean_error)}});
        }
        j["rankings"].push_back({{"measure", std::string(to_string(t.measure))}, {"rows", rows}});
    }
    j["pools"] = json::array();
    for (const auto& p : report.pools) {
        j["pools"].push_back({{"id", std::string(to_string(p.id))}, {"members", method_list(p.members)}});
    }
    j["train_ids"] = report.train_ids;
    j["test_ids"] = report.test_ids;
    j["variants"] = json::array();
    for (const auto& v : report.variants) {
        j["variants"].push_back({{"pool", std::string(to_string(v.pool))},
                                 {"measure", std::string(to_string(v.measure))},
                                 {"reduction", std::string(to_string(v.reduction))},
                                 {"features", v.features},
                                 {"train_rows", v.train_rows},
                                 {"test_rows", v.test_rows}});
    }
    j["boundaries"] = json::array();
    for (const auto& b : report.boundaries) {
        j["boundaries"].push_back({{"pool", std::string(to_string(b.pool))},
                                   {"measure", std::string(to_string(b.measure))},
                                   {"value", number(b.value)}});
    }
    j["individuals"] = json::array();
    for (const auto& i : report.individuals) {
        j["individuals"].push_back({{"pool", std::string(to_string(i.pool))},
                                    {"measure", std::string(to_string(i.measure))},
                                    {"method", std::string(to_string(i.method))},
                                    {"test_error", number(i.test_error)}});
    }
    j["learners"] = json::array();
    for (const auto& r : report.learners) {
        json entry{{"learner", std::string(to_string(r.learner))},
                   {"pool", std::string(to_string(r.pool))},
                   {"measure", std::string(to_string(r.measure))},
                   {"reduction", std::string(to_string(r.reduction))},
                   {"cv_accuracy", number(r.cv_accuracy)},
                   {"test_accuracy", number(r.test_accuracy)},
                   {"test_error", number(r.test_error)},
                   {"hyperparameters", r.hyperparameters},
                   {"recommendations", method_list(r.recommendations)}};
        if (!r.error.empty()) {
            entry["error"] = r.error;
        }
        json labels = json::array();
        for (int l : r.confusion.labels) {
            labels.push_back(std::string(to_string(static_cast<MethodId>(l))));
        }
        entry["confusion"] = {{"labels", labels}, {"counts", r.confusion.counts}};
        j["learners"].push_back(std::move(entry));
    }
    j["label_distribution"] = json::array();
    for (const auto& l : report.labels) {
        j["label_distribution"].push_back({{"pool", std::string(to_string(l.pool))},
                                           {"measure", std::string(to_string(l.measure))},
                                           {"method", std::string(to_string(l.method))},
                                           {"percent", number(l.percent)}});
    }
    j["outperformance"] = json::array();
    for (const auto& o : outperformance_table(report)) {
        j["outperformance"].push_back({{"learner", std::string(to_string(o.learner))},
                                       {"pool", std::string(to_string(o.pool))},
                                       {"measure", std::string(to_string(o.measure))},
                                       {"reduction", std::string(to_string(o.reduction))},
                                       {"percent", o.percent}});
    }
    j["decreasing_pattern"] = json::array();
    for (const auto& p : detect_decreasing_pattern(report)) {
        j["decreasing_pattern"].push_back({{"measure", std::string(to_string(p.measure))},
                                           {"reduction", std::string(to_string(p.reduction))},
                                           {"learners", p.learners}});
    }
    return j.dump(2);
}

std::vector<std::filesystem::path> write_tables(const ExperimentReport& report, const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> written;
    auto has_pool = [&](PoolId id) {
        return std::any_of(report.pools.begin(), report.pools.end(), [&](const PoolSpec& p) { return p.id == id; });
    };
    const bool any_main = std::any_of(main_pools.begin(), main_pools.end(), has_pool);
    std::vector<LearnerKind> learners;
    for (const auto& r : report.learners) {
        if (std::find(learners.begin(), learners.end(), r.learner) == learners.end()) {
            learners.push_back(r.learner);
        }
    }
    auto learner_error = [&](LearnerKind k, PoolId p, Measure m, Reduction red) {
        for (const auto& r : report.learners) {
            if (r.learner == k && r.pool == p && r.measure == m && r.reduction == red) {
                return r.test_error;
            }
        }
        return nan;
    };
    auto boundary_of = [&](PoolId p, Measure m) {
        for (const auto& b : report.boundaries) {
            if (b.pool == p && b.measure == m) {
                return b.value;
            }
        }
        return nan;
    };
    auto individual_of = [&](PoolId p, Measure m, MethodId method) {
        for (const auto& i : report.individuals) {
            if (i.pool == p && i.measure == m && i.method == method) {
                return i.test_error;
            }
        }
        return nan;
    };
    auto begin_file = [&](std::string_view name) {
        written.push_back(dir / name);
        return open_output(written.back());
    };

    if (any_main) {
        auto out = begin_file("table2_ranking.csv");
        out << "method,smape,mase\n";
        const RankingTable* first = nullptr;
        for (const auto& t : report.rankings) {
            if (t.measure == Measure::smape || first == nullptr) {
                first = &t;
            }
        }
        auto mean_of = [&](Measure m, MethodId method) {
            for (const auto& t : report.rankings) {
                if (t.measure == m) {
                    for (const auto& row : t.rows) {
                        if (row.method == method) {
                            return row.mean_error;
                        }
                    }
                }
            }
            return nan;
        };
        if (first != nullptr) {
            for (const auto& row : first->rows) {
                out << to_string(row.method) << ',' << fixed6(mean_of(Measure::smape, row.method)) << ','
                    << fixed6(mean_of(Measure::mase, row.method)) << '\n';
            }
        }
    }

    constexpr std::array<std::string_view, 3> main_files{"table3_top4.csv", "table4_top6.csv", "table5_top6_snaive.csv"};
    for (std::size_t p = 0; p < main_pools.size(); ++p) {
        const PoolId pool = main_pools[p];
        if (!has_pool(pool)) {
            continue;
        }
        auto out = begin_file(main_files[p]);
        out << "model,smape,smape_fs,smape_pca,mase,mase_fs,mase_pca\n";
        auto row = [&](std::string_view label, auto value) {
            out << label;
            for (Measure m : all_measures) {
                for (Reduction red : all_reductions) {
                    out << ',' << fixed6(value(m, red));
                }
            }
            out << '\n';
        };
        row("boundary", [&](Measure m, Reduction) { return boundary_of(pool, m); });
        for (LearnerKind k : learners) {
            row(to_string(k), [&](Measure m, Reduction red) { return learner_error(k, pool, m, red); });
        }
        for (const auto& spec : report.pools) {
            if (spec.id == pool) {
                for (MethodId method : spec.members) {
                    row(to_string(method), [&](Measure m, Reduction) { return individual_of(pool, m, method); });
                }
            }
        }
    }

    if (has_pool(PoolId::basic)) {
        auto out = begin_file("table6_basic.csv");
        out << "model,smape,mase\n";
        auto row = [&](std::string_view label, auto value) {
            out << label << ',' << fixed6(value(Measure::smape)) << ',' << fixed6(value(Measure::mase)) << '\n';
        };
        row("boundary", [&](Measure m) { return boundary_of(PoolId::basic, m); });
        for (LearnerKind k : learners) {
            row(to_string(k), [&](Measure m) { return learner_error(k, PoolId::basic, m, Reduction::raw); });
        }
        for (const auto& spec : report.pools) {
            if (spec.id == PoolId::basic) {
                for (MethodId method : spec.members) {
                    row(to_string(method), [&](Measure m) { return individual_of(PoolId::basic, m, method); });
                }
            }
        }
    }

    if (any_main) {
        auto out = begin_file("table7_label_distribution.csv");
        out << "method,smape_4,smape_6,smape_7,mase_4,mase_6,mase_7\n";
        std::vector<MethodId> methods;
        for (const auto& spec : report.pools) {
            if (spec.id != PoolId::basic) {
                for (MethodId m : spec.members) {
                    if (std::find(methods.begin(), methods.end(), m) == methods.end()) {
                        methods.push_back(m);
                    }
                }
            }
        }
        for (MethodId method : methods) {
            out << to_string(method);
            for (Measure m : all_measures) {
                for (PoolId pool : main_pools) {
                    const auto it = std::find_if(report.labels.begin(), report.labels.end(), [&](const LabelShare& l) {
                        return l.pool == pool && l.measure == m && l.method == method;
                    });
                    out << ',' << (it == report.labels.end() ? std::string("-") : fmt::format("{:.2f}", it->percent));
                }
            }
            out << '\n';
        }
    }

    if (any_main) {
        const auto table = outperformance_table(report);
        for (Measure m : all_measures) {
            auto out = begin_file(m == Measure::smape ? "table8_outperformance_smape.csv"
                                                      : "table9_outperformance_mase.csv");
            out << "learner,4,6,7,4_fs,6_fs,7_fs,4_pca,6_pca,7_pca\n";
            for (LearnerKind k : learners) {
                out << to_string(k);
                for (Reduction red : all_reductions) {
                    for (PoolId pool : main_pools) {
                        const auto it = std::find_if(table.begin(), table.end(), [&](const Outperformance& o) {
                            return o.learner == k && o.pool == pool && o.measure == m && o.reduction == red;
                        });
                        out << ',' << (it == table.end() ? std::string("NA") : std::to_string(it->percent));
                    }
                }
                out << '\n';
            }
        }
    }

    if (any_main) {
        const auto patterns = detect_decreasing_pattern(report);
        auto out = begin_file("table10_decreasing_pattern.csv");
        out << "case,smape,mase\n";
        for (Reduction red : all_reductions) {
            out << to_string(red);
            for (Measure m : all_measures) {
                const auto it = std::find_if(patterns.begin(), patterns.end(),
                                             [&](const PatternCount& c) { return c.measure == m && c.reduction == red; });
                out << ',' << (it == patterns.end() ? std::string("NA") : std::to_string(it->learners));
            }
            out << '\n';
        }
    }

    {
        auto out = begin_file("confusion_matrices.csv");
        out << "pool,measure,reduction,learner,actual,predicted,count\n";
        for (const auto& r : report.learners) {
            const auto& cm = r.confusion;
            for (std::size_t a = 0; a < cm.labels.size(); ++a) {
                for (std::size_t p = 0; p < cm.labels.size(); ++p) {
                    out << to_string(r.pool) << ',' << to_string(r.measure) << ',' << to_string(r.reduction) << ','
                        << to_string(r.learner) << ',' << to_string(static_cast<MethodId>(cm.labels[a])) << ','
                        << to_string(static_cast<MethodId>(cm.labels[p])) << ',' << cm.counts[a][p] << '\n';
                }
            }
        }
    }
    {
        auto out = begin_file("variants.csv");
        out << "pool,measure,reduction,train_rows,test_rows,features\n";
        for (const auto& v : report.variants) {
            std::string joined;
            for (const auto& f : v.features) {
                joined += (joined.empty() ? "" : ";") + f;
            }
            out << to_string(v.pool) << ',' << to_string(v.measure) << ',' << to_string(v.reduction) << ','
                << v.train_rows << ',' << v.test_rows << ',' << csv::quote_if_needed(joined) << '\n';
        }
    }
    return written;
}

} // namespace tsmeta
