import json
import math

import numpy as np
import pytest

import tsmeta


def write_collection(path, n_series=12, length=70, seed=3):
    rng = np.random.default_rng(seed)
    with open(path, "w") as f:
        f.write("series_id,t,value\n")
        for i in range(n_series):
            t = np.arange(length)
            amp = 15.0 * (i % 3)
            y = 50 + 0.1 * t + amp * np.sin(2 * np.pi * t / 7) + rng.normal(0, 2, length)
            for k, v in enumerate(y):
                f.write(f"s{i:02d},{k + 1},{v:.5f}\n")


def test_registry_names():
    assert len(tsmeta.methods) == 12
    assert tsmeta.methods[0] == "naive"
    assert len(tsmeta.feature_names) == 24
    assert set(tsmeta.learners) == {"decision_tree", "random_forest", "treebag", "gbt", "mlp", "svm"}


def test_measures_match_hand_values():
    assert tsmeta.smape([1.0, 2.0], [1.0, 3.0]) == pytest.approx(20.0)
    assert tsmeta.mape([2.0, 4.0], [1.0, 5.0]) == pytest.approx(37.5)
    assert tsmeta.mase([3.0], [4.0], [1.0, 2.0, 3.0], season=1) == pytest.approx(1.0)


def test_simple_forecasts():
    values = list(range(1, 15))
    assert tsmeta.forecast("naive", values, 3) == [14.0, 14.0, 14.0]
    assert tsmeta.forecast("snaive", values, 3) == [8.0, 9.0, 10.0]
    out = tsmeta.forecast("ets_auto", [float(v) for v in values] * 2, 7)
    assert len(out) == 7 and all(math.isfinite(v) for v in out)


def test_features_are_bounded():
    rng = np.random.default_rng(0)
    f = tsmeta.extract_features(list(rng.normal(size=140)), season=7)
    assert set(f) == set(tsmeta.feature_names)
    assert 0.0 <= f["entropy"] <= 1.0
    assert 0.0 <= f["trend"] <= 1.0


def test_reduction_helpers():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(50, 3))
    x[:, 0] = np.arange(50.0)
    labels = [int(i >= 20) for i in range(50)]  # split falls on a bin edge
    weights = tsmeta.oner_weights(x, labels, ["a", "b", "c"])
    assert weights["a"] == pytest.approx(1.0)
    pca = tsmeta.fit_pca(x, 0.999)
    c = pca.components
    assert np.allclose(c.T @ c, np.eye(3), atol=1e-8)
    assert pca.transform(x).shape == (50, pca.k)


def test_train_and_predict():
    rng = np.random.default_rng(2)
    x = np.vstack([rng.normal(-3, 1, size=(40, 2)), rng.normal(3, 1, size=(40, 2))])
    y = [0] * 40 + [1] * 40
    model = tsmeta.train("random_forest", x, y, folds=3, repeats=1, seed=5)
    assert model.cv_accuracy >= 0.95
    assert model.predict(x) == y
    assert json.loads(model.to_json())["learner"] == "random_forest"


def test_errors_are_typed(tmp_path):
    with pytest.raises(tsmeta.ConfigError):
        tsmeta.forecast("no_such_method", [1.0, 2.0], 1)
    with pytest.raises(tsmeta.DataError):
        tsmeta.load_collection(str(tmp_path / "missing.csv"))
    with pytest.raises(tsmeta.ConfigError):
        tsmeta.evaluate(data="x.csv", unknown_key=1)


def test_pipeline_round_trip(tmp_path):
    data = tmp_path / "data.csv"
    write_collection(data)
    out = tmp_path / "out"
    common = dict(data=str(data), horizon=7, origins=2, out=str(out))
    ev = tsmeta.evaluate(**common)
    assert len(ev["records"]["value"]) == 12 * 12 * 2
    assert not ev["cache_hit"]
    assert tsmeta.evaluate(**common)["cache_hit"]
    feats = tsmeta.features(**common)
    assert len(feats["rows"]) == 12
    report = tsmeta.run(**common, pools=["top4"], learners=["decision_tree"], reductions=["raw"],
                        folds=3, repeats=1)
    boundary = report["boundaries"][0]["value"]
    assert all(r["test_error"] >= boundary - 1e-12 for r in report["learners"])
    assert (out / "table3_top4.csv").exists()
    assert "pool top4" in tsmeta.report(out=str(out))
