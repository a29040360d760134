"""End-to-end checks of the command-line tool (skipped unless TSMETA_CLI is set)."""

import csv
import json
import os
import subprocess

import pytest

from test_smoke import write_collection

CLI = os.environ.get("TSMETA_CLI")
pytestmark = pytest.mark.skipif(not CLI, reason="TSMETA_CLI not set")

FAST = ["--horizon", "7", "--origins", "2", "--folds", "3", "--repeats", "1", "--log-level", "error"]


def tsmeta(*args, env=None):
    return subprocess.run([CLI, *args], capture_output=True, text=True, env=env)


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "data.csv"
    write_collection(path, n_series=15)
    return path


def read_rows(path):
    with open(path) as f:
        return list(csv.reader(f))


def test_exit_codes(tmp_path, data):
    missing = tsmeta("evaluate", "--data", str(tmp_path / "none.csv"), "--out", str(tmp_path))
    assert missing.returncode == 2
    assert json.loads(missing.stderr.strip().splitlines()[-1])["error"]["kind"] == "data"
    bad_ratio = tsmeta("run", "--data", str(data), "--test-ratio", "1.5", "--out", str(tmp_path))
    assert bad_ratio.returncode == 1
    assert json.loads(bad_ratio.stderr)["error"]["kind"] == "config"
    assert tsmeta("run", "--no-such-flag").returncode == 1
    assert tsmeta("evaluate", "--data", str(data), "--learners", "knn").returncode == 1


def test_evaluate_cache_is_byte_identical(tmp_path, data):
    out = tmp_path / "out"
    first = tsmeta("evaluate", "--data", str(data), "--out", str(out), *FAST)
    assert first.returncode == 0, first.stderr
    records = (out / "records.csv").read_bytes()
    ranking = (out / "ranking_smape.csv").read_bytes()
    second = tsmeta("evaluate", "--data", str(data), "--out", str(out), *FAST)
    assert "(cached)" in second.stdout
    assert (out / "records.csv").read_bytes() == records
    assert (out / "ranking_smape.csv").read_bytes() == ranking
    assert len(read_rows(out / "records.csv")) == 1 + 15 * 12 * 2
    values = [float(r[2]) for r in read_rows(out / "ranking_smape.csv")[1:]]
    assert values == sorted(values)


def test_features_output(tmp_path, data):
    out = tmp_path / "out"
    result = tsmeta("features", "--data", str(data), "--out", str(out), *FAST)
    assert result.returncode == 0, result.stderr
    rows = read_rows(out / "features.csv")
    assert len(rows) == 16 and len(rows[0]) == 25
    report = json.loads((out / "constant_columns.json").read_text())
    assert "frequency" in report["constant_columns"]


def test_config_file_and_flag_precedence(tmp_path, data):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"data": str(data), "horizon": 99, "pools": ["basic"],
                                  "learners": ["decision_tree"], "out": str(tmp_path / "from_config")}))
    out = tmp_path / "flags"
    result = tsmeta("run", "--config", str(config), "--out", str(out), *FAST)
    assert result.returncode == 0, result.stderr
    assert not (tmp_path / "from_config").exists()
    tables = sorted(p.name for p in out.glob("table*.csv"))
    assert tables == ["table6_basic.csv"]
    used = json.loads((out / "run_config.json").read_text())
    assert used["horizon"] == 7


def test_seed_changes_only_learner_cells(tmp_path, data):
    common = ["run", "--data", str(data), "--pools", "top4", "--learners", "random_forest,mlp",
              "--reductions", "raw", *FAST]
    a = tsmeta(*common, "--seed", "1", "--out", str(tmp_path / "a"))
    b = tsmeta(*common, "--seed", "2", "--out", str(tmp_path / "b"))
    assert a.returncode == 0 and b.returncode == 0, a.stderr + b.stderr
    rows_a = read_rows(tmp_path / "a" / "table3_top4.csv")
    rows_b = read_rows(tmp_path / "b" / "table3_top4.csv")
    learners = {"random_forest", "mlp"}
    fixed_a = [r for r in rows_a if r[0] not in learners]
    fixed_b = [r for r in rows_b if r[0] not in learners]
    assert fixed_a == fixed_b
    report = tsmeta("report", "--out", str(tmp_path / "a"))
    assert report.returncode == 0 and "pool top4" in report.stdout


def test_output_dir_from_environment(tmp_path, data):
    env = dict(os.environ, TSMETA_OUT=str(tmp_path / "env_out"))
    result = tsmeta("evaluate", "--data", str(data), *FAST, env=env)
    assert result.returncode == 0, result.stderr
    assert (tmp_path / "env_out" / "records.csv").exists()
