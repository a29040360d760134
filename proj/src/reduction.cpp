#include "tsmeta/reduction.hpp"

#include "json.hpp"
#include "tsmeta/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

namespace tsmeta {

double FeatureWeights::at(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) {
            return weights[i];
        }
    }
    throw ConfigError("no weight for feature '" + std::string(name) + "'");
}

FeatureWeights oner_weights(const Eigen::MatrixXd& x, std::span<const int> labels,
                            std::span<const std::string> names, int bins) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (labels.size() != n || names.size() != static_cast<std::size_t>(x.cols())) {
        throw ConfigError("OneR inputs have inconsistent sizes");
    }
    if (bins < 1) {
        throw ConfigError("OneR needs at least one bin");
    }
    std::vector<int> distinct(labels.begin(), labels.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2) {
        throw DataError("OneR needs at least two distinct labels");
    }

    FeatureWeights out;
    out.names.assign(names.begin(), names.end());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        std::vector<double> sorted(x.col(j).data(), x.col(j).data() + n);
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> edges;
        for (int i = 1; i < bins; ++i) {
            const auto pos = (static_cast<std::size_t>(i) * n + static_cast<std::size_t>(bins) - 1) /
                             static_cast<std::size_t>(bins);
            edges.push_back(sorted[std::max<std::size_t>(pos, 1) - 1]);
        }
        // counts[bin][label]; std::map keeps labels ascending for the tie rule
        std::vector<std::map<int, std::size_t>> counts(static_cast<std::size_t>(bins));
        for (std::size_t r = 0; r < n; ++r) {
            const double v = x(static_cast<Eigen::Index>(r), j);
            const auto bin = static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), v) - edges.begin());
            ++counts[bin][labels[r]];
        }
        std::size_t correct = 0;
        for (const auto& bin : counts) {
            std::size_t best = 0;
            for (const auto& [label, c] : bin) {
                best = std::max(best, c);
            }
            correct += best;
        }
        out.weights.push_back(static_cast<double>(correct) / static_cast<double>(n));
    }
    return out;
}

std::vector<std::string> select_top_k(const FeatureWeights& weights, std::size_t k) {
    std::vector<std::size_t> order(weights.names.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return weights.weights[a] > weights.weights[b]; });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(k, order.size()); ++i) {
        out.push_back(weights.names[order[i]]);
    }
    return out;
}

std::vector<std::string> select_named(std::span<const std::string> requested,
                                      std::span<const std::string> available) {
    std::vector<std::string> out;
    for (const auto& name : requested) {
        if (std::find(available.begin(), available.end(), name) == available.end()) {
            throw ConfigError("unknown feature '" + name + "'");
        }
        if (std::find(out.begin(), out.end(), name) == out.end()) {
            out.push_back(name);
        }
    }
    return out;
}

PcaModel fit_pca(const Eigen::MatrixXd& x, double cumvar_threshold) {
    if (x.rows() < 2 || x.cols() < 1) {
        throw DataError("PCA needs at least two rows and one column");
    }
    PcaModel model;
    model.mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd centred = x.rowwise() - model.mean.transpose();
    model.scale = (centred.array().square().colwise().sum() / static_cast<double>(x.rows() - 1)).sqrt().transpose();
    for (Eigen::Index j = 0; j < model.scale.size(); ++j) {
        if (!(model.scale(j) > 0.0)) {
            model.scale(j) = 1.0;  // constant column: contributes nothing after centring
        }
    }
    const Eigen::MatrixXd z = centred.array().rowwise() / model.scale.transpose().array();
    const Eigen::MatrixXd cov = (z.transpose() * z) / static_cast<double>(x.rows() - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw FitError("PCA eigendecomposition failed");
    }
    const Eigen::Index p = cov.rows();
    // Eigen returns ascending eigenvalues
    Eigen::VectorXd values = solver.eigenvalues().reverse().cwiseMax(0.0);
    model.components = solver.eigenvectors().rowwise().reverse();
    const double total = values.sum();
    if (!(total > 0.0)) {
        throw DataError("PCA input has rank 0 after centring");
    }
    model.explained_ratio = values / total;
    for (Eigen::Index c = 0; c < p; ++c) {
        Eigen::Index arg = 0;
        model.components.col(c).cwiseAbs().maxCoeff(&arg);
        if (model.components(arg, c) < 0.0) {
            model.components.col(c) *= -1.0;
        }
    }
    double cumulative = 0.0;
    model.k = static_cast<int>(p);
    for (Eigen::Index c = 0; c < p; ++c) {
        cumulative += model.explained_ratio(c);
        if (cumulative >= cumvar_threshold) {
            model.k = static_cast<int>(c + 1);
            break;
        }
    }
    model.k = std::max(model.k, 1);
    return model;
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& x) {
    if (x.cols() != model.mean.size()) {
        throw ConfigError("PCA input has " + std::to_string(x.cols()) + " columns, model expects " +
                          std::to_string(model.mean.size()));
    }
    const Eigen::MatrixXd z =
        (x.rowwise() - model.mean.transpose()).array().rowwise() / model.scale.transpose().array();
    return z * model.components.leftCols(model.k);
}

std::string pca_to_json(const PcaModel& model) {
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    nlohmann::json j;
    j["mean"] = vec(model.mean);
    j["scale"] = vec(model.scale);
    j["explained_ratio"] = vec(model.explained_ratio);
    j["k"] = model.k;
    auto comps = nlohmann::json::array();
    for (Eigen::Index c = 0; c < model.components.cols(); ++c) {
        comps.push_back(vec(model.components.col(c)));
    }
    j["components"] = comps;
    return j.dump(2);
}

PcaModel pca_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        auto vec = [](const nlohmann::json& a) {
            const auto v = a.get<std::vector<double>>();
            return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
        };
        PcaModel m;
        m.mean = vec(j.at("mean"));
        m.scale = vec(j.at("scale"));
        m.explained_ratio = vec(j.at("explained_ratio"));
        m.k = j.at("k").get<int>();
        const auto& comps = j.at("components");
        m.components.resize(m.mean.size(), static_cast<Eigen::Index>(comps.size()));
        for (std::size_t c = 0; c < comps.size(); ++c) {
            m.components.col(static_cast<Eigen::Index>(c)) = vec(comps[c]);
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid PCA model JSON: ") + e.what());
    }
}

void write_weights_csv(const std::filesystem::path& path, const FeatureWeights& weights) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << "feature,weight\n";
    for (std::size_t i = 0; i < weights.names.size(); ++i) {
        out << weights.names[i] << ',' << fmt::format("{}", weights.weights[i]) << '\n';
    }
}

} // namespace tsmeta
