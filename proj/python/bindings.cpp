#include "tsmeta/commands.hpp"
#include "tsmeta/error.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>
#include <spdlog/spdlog.h>

namespace py = pybind11;
using namespace tsmeta;

namespace {

TimeSeries make_series(std::vector<double> values, int season, int season2, std::string id = "series") {
    TimeSeries ts;
    ts.id = std::move(id);
    ts.values = std::move(values);
    ts.seasonal_period = season;
    ts.seasonal_period2 = season2;
    return ts;
}

py::dict feature_dict(const FeatureVector& fv) {
    py::dict d;
    for (std::size_t i = 0; i < feature_count; ++i) {
        d[py::str(std::string(feature_names[i]))] = fv.values[i];
    }
    return d;
}

py::dict records_dict(std::span<const EvaluationRecord> records) {
    py::list ids, methods, measures, values, failed;
    for (const auto& r : records) {
        ids.append(r.series_id);
        methods.append(std::string(to_string(r.method)));
        measures.append(std::string(to_string(r.measure)));
        values.append(r.value);
        failed.append(r.failed);
    }
    py::dict d;
    d["series_id"] = ids;
    d["method"] = methods;
    d["measure"] = measures;
    d["value"] = values;
    d["failed"] = failed;
    return d;
}

RunConfig config_from_kwargs(const py::kwargs& kwargs) {
    auto json = py::module_::import("json");
    RunConfig base;
    base.out = default_output_dir();
    return config_from_json(py::str(json.attr("dumps")(kwargs)), base);
}

std::vector<std::pair<std::string, double>> ranking_rows(const RankingTable& t) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& row : t.rows) {
        out.emplace_back(std::string(to_string(row.method)), row.mean_error);
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Meta-learning recommender for forecasting model selection";
    spdlog::set_level(spdlog::level::warn);

    auto base = py::register_exception<Error>(m, "TsmetaError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());

    m.attr("methods") = [] {
        std::vector<std::string> names;
        for (MethodId id : all_methods) names.emplace_back(to_string(id));
        return names;
    }();
    m.attr("feature_names") = std::vector<std::string>(feature_names.begin(), feature_names.end());
    m.attr("learners") = [] {
        std::vector<std::string> names;
        for (LearnerKind k : all_learners) names.emplace_back(to_string(k));
        return names;
    }();

    m.def(
        "load_collection",
        [](const std::filesystem::path& path, const std::string& format, int season) {
            std::vector<std::pair<std::string, std::vector<double>>> out;
            for (auto& ts : load_collection(path, parse_csv_format(format), season)) {
                out.emplace_back(ts.id, std::move(ts.values));
            }
            return out;
        },
        py::arg("path"), py::arg("format") = "long-csv", py::arg("season") = 7,
        "Reads a CSV collection as a list of (id, values); missing values are NaN.");

    m.def(
        "forecast",
        [](const std::string& method, std::vector<double> values, int horizon, int season, int mapa_max_level,
           std::uint64_t seed) {
            ForecasterConfig cfg;
            cfg.mapa_max_level = mapa_max_level;
            cfg.seed = seed;
            return run_forecaster(parse_method(method), make_series(std::move(values), season, 0), horizon, cfg)
                .values;
        },
        py::arg("method"), py::arg("values"), py::arg("horizon"), py::arg("season") = 7,
        py::arg("mapa_max_level") = 7, py::arg("seed") = 20190601);

    m.def("smape", [](std::vector<double> a, std::vector<double> f) { return smape(a, f); });
    m.def("mape", [](std::vector<double> a, std::vector<double> f) { return mape(a, f); });
    m.def(
        "mase",
        [](std::vector<double> a, std::vector<double> f, std::vector<double> insample, int season) {
            return seasonal_mase(a, f, insample, season);
        },
        py::arg("actual"), py::arg("forecast"), py::arg("insample"), py::arg("season") = 7);

    m.def(
        "extract_features",
        [](std::vector<double> values, int season, int season2) {
            return feature_dict(extract_features(make_series(std::move(values), season, season2)));
        },
        py::arg("values"), py::arg("season") = 7, py::arg("season2") = 0);

    m.def(
        "oner_weights",
        [](const Eigen::MatrixXd& x, std::vector<int> labels, std::vector<std::string> names, int bins) {
            const auto w = oner_weights(x, labels, names, bins);
            std::map<std::string, double> out;
            for (std::size_t i = 0; i < w.names.size(); ++i) out[w.names[i]] = w.weights[i];
            return out;
        },
        py::arg("x"), py::arg("labels"), py::arg("names"), py::arg("bins") = 5);

    py::class_<PcaModel>(m, "PcaModel")
        .def_readonly("mean", &PcaModel::mean)
        .def_readonly("scale", &PcaModel::scale)
        .def_readonly("components", &PcaModel::components)
        .def_readonly("explained_ratio", &PcaModel::explained_ratio)
        .def_readonly("k", &PcaModel::k)
        .def("transform", [](const PcaModel& p, const Eigen::MatrixXd& x) { return pca_transform(p, x); })
        .def("to_json", [](const PcaModel& p) { return pca_to_json(p); });
    m.def("fit_pca", &fit_pca, py::arg("x"), py::arg("threshold") = 0.999);

    py::class_<TrainedModel>(m, "Model")
        .def_property_readonly("learner", [](const TrainedModel& t) { return std::string(to_string(t.learner)); })
        .def_readonly("hyperparameters", &TrainedModel::hyperparameters)
        .def_readonly("cv_accuracy", &TrainedModel::cv_accuracy)
        .def_readonly("classes", &TrainedModel::classes)
        .def("predict", [](const TrainedModel& t, const Eigen::MatrixXd& x) { return t.predict_rows(x); })
        .def("to_json", [](const TrainedModel& t) { return model_metadata_json(t); });
    m.def(
        "train",
        [](const std::string& learner, const Eigen::MatrixXd& x, std::vector<int> labels, int folds, int repeats,
           std::uint64_t seed) {
            MetaDataset data;
            data.x = x;
            data.labels = std::move(labels);
            py::gil_scoped_release release;
            return train(parse_learner(learner), data, CvSpec{folds, repeats, seed, 1});
        },
        py::arg("learner"), py::arg("x"), py::arg("labels"), py::arg("folds") = 10, py::arg("repeats") = 5,
        py::arg("seed") = 20190601, "Grid-searched training with repeated k-fold cross-validation.");

    m.def(
        "evaluate",
        [](const py::kwargs& kwargs) {
            const auto config = config_from_kwargs(kwargs);
            EvaluateResult r;
            {
                py::gil_scoped_release release;
                r = cmd_evaluate(config);
            }
            py::dict d;
            d["records"] = records_dict(r.records);
            py::dict rankings;
            for (const auto& t : r.rankings) rankings[py::str(std::string(to_string(t.measure)))] = ranking_rows(t);
            d["rankings"] = rankings;
            d["skipped"] = r.skipped;
            d["cache_hit"] = r.cache_hit;
            return d;
        },
        "Rolling-origin evaluation; keyword arguments use the config-file keys.");
    m.def(
        "features",
        [](const py::kwargs& kwargs) {
            const auto config = config_from_kwargs(kwargs);
            FeaturesResult r;
            {
                py::gil_scoped_release release;
                r = cmd_features(config);
            }
            py::dict rows;
            for (std::size_t i = 0; i < r.matrix.series_ids.size(); ++i) {
                rows[py::str(r.matrix.series_ids[i])] = feature_dict(r.matrix.rows[i]);
            }
            py::dict d;
            d["rows"] = rows;
            d["constant"] = r.matrix.constant_names();
            d["cache_hit"] = r.cache_hit;
            return d;
        },
        "Feature extraction; keyword arguments use the config-file keys.");
    m.def(
        "run",
        [](const py::kwargs& kwargs) {
            const auto config = config_from_kwargs(kwargs);
            std::string text;
            {
                py::gil_scoped_release release;
                text = report_to_json(cmd_run(config));
            }
            return py::module_::import("json").attr("loads")(text);
        },
        "Full experiment; returns the report as a dict and writes the tables.");
    m.def("report", [](const py::kwargs& kwargs) { return cmd_report(config_from_kwargs(kwargs)); });
}
