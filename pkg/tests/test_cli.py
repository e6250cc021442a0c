"""
Tests for app.py and commands/ - The command-line surface, driven through CliRunner.
"""
import json
import os
from unittest.mock import patch

import click
import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from app import cli
from commands.evaluate import parse_lambda_values
from utils.config import DEFAULT_BENCHMARK_DIR
from utils.trec import parse_trec_topics
from utils.vecspace import EmbeddingModel, TemporalModelSet, load_model, save_model, save_temporal_models


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


@pytest.fixture
def toy_project(tmp_path, event_factory, write_events):
    """Three events; the 1995 one has no year model."""
    events = [
        event_factory(name="1990 Great Flood", year=1990),
        event_factory(name="1991 Harbor Storm", year=1991),
        event_factory(name="1995 Late Summit", year=1995),
    ]
    rng = np.random.default_rng(3)
    words = [f"w{i:03d}" for i in range(40)]
    word_vectors = rng.standard_normal((len(words), 6))
    event_vectors = rng.standard_normal((len(events), 6))

    static = EmbeddingModel("static", 6, words + [e.token for e in events],
                            np.vstack([word_vectors, event_vectors]))
    save_model(static, str(tmp_path / "static.txt"))
    temporal = TemporalModelSet({
        year: EmbeddingModel(str(year), 6, words, word_vectors + 0.01 * rng.standard_normal(word_vectors.shape))
        for year in (1990, 1991)
    })
    save_temporal_models(temporal, str(tmp_path / "temporal"))

    config = {
        "paths": {
            "static_model": "static.txt",
            "temporal_dir": "temporal",
            "events": os.path.relpath(write_events(events), tmp_path),
            "output_dir": "out",
        },
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    return str(config_path)


@pytest.fixture
def bench_config(benchmark_dir):
    return os.path.join(benchmark_dir, "config.json")


def _records(output):
    return [json.loads(line) for line in output.splitlines() if line.strip()]


class TestProjectCommand:
    """Tests for the project command."""

    def test_projects_and_skips(self, runner, toy_project, tmp_path):
        """Two events are projected and the one without a year model is skipped."""
        result = runner.invoke(cli, ["--config", toy_project, "project"])
        assert result.exit_code == 0, result.stderr
        payload = json.loads(result.stdout)
        assert payload["ok"] is True
        assert payload["data"]["projected"] == 2
        assert payload["data"]["skipped"] == 1

        enriched = load_model(str(tmp_path / "out" / "enriched" / "1990.txt"), label="1990")
        assert "1990_Great_Flood" in enriched
        assert "1991_Harbor_Storm" not in enriched

    def test_report_lines(self, runner, toy_project, tmp_path, read_jsonl):
        """The report has one line per event with the skip reason."""
        runner.invoke(cli, ["--config", toy_project, "project"])
        records = read_jsonl(str(tmp_path / "out" / "projection_report.jsonl"))
        assert [r["status"] for r in records] == ["projected", "projected", "skipped"]
        assert records[2]["reason"] == "no model for year"

    def test_repeat_is_byte_identical(self, runner, toy_project, tmp_path):
        """Projecting twice writes the same enriched files."""
        first, second = str(tmp_path / "e1"), str(tmp_path / "e2")
        runner.invoke(cli, ["--config", toy_project, "project", "--enriched-dir", first])
        runner.invoke(cli, ["--config", toy_project, "project", "--enriched-dir", second])
        for year in ("1990.txt", "1991.txt"):
            with open(os.path.join(first, year), "rb") as a, open(os.path.join(second, year), "rb") as b:
                assert a.read() == b.read()

    def test_missing_inputs(self, runner, tmp_path):
        """Without model paths the command fails with a validation error."""
        config = tmp_path / "config.json"
        config.write_text("{}", encoding="utf-8")
        result = runner.invoke(cli, ["--config", str(config), "project"])
        assert result.exit_code == 2
        assert json.loads(result.stderr.strip().splitlines()[-1])["error"]["code"] == "VALIDATION_ERROR"


class TestQueryCommands:
    """Tests for classify, detect, expand and search on the benchmark."""

    @pytest.fixture
    def topic(self, benchmark_dir):
        return parse_trec_topics(os.path.join(benchmark_dir, "topics.txt"))[0][1].raw

    def test_classify(self, runner, bench_config, tmp_path, topic):
        """A topic query is event-related and nonsense is not."""
        result = runner.invoke(cli, ["--config", bench_config, "--out", str(tmp_path),
                                     "classify", "--query", topic, "--query", "zzzz qqqq"])
        assert result.exit_code == 0, result.stderr
        records = _records(result.stdout)
        assert [(r["qid"], r["event_related"]) for r in records] == [("q1", True), ("q2", False)]
        assert os.path.exists(tmp_path / "classify.jsonl")

    def test_detect(self, runner, bench_config, tmp_path, topic):
        """The topic's own event is detected."""
        result = runner.invoke(cli, ["--config", bench_config, "--out", str(tmp_path), "detect", "--query", topic])
        assert result.exit_code == 0, result.stderr
        records = _records(result.stdout)
        assert records[0]["event_id"] == "E001"
        assert records[0]["scorer"] == "frequency"

    def test_expand_explain(self, runner, bench_config, tmp_path, topic):
        """--explain adds the scored candidates."""
        result = runner.invoke(cli, ["--config", bench_config, "--out", str(tmp_path),
                                     "expand", "--query", topic, "--explain"])
        assert result.exit_code == 0, result.stderr
        record = _records(result.stdout)[0]
        assert record["variant"] == "temporal"
        assert record["candidates"]
        assert sum(weight for _, weight in record["terms"]) == pytest.approx(1.0)

    def test_expand_static_variant(self, runner, bench_config, tmp_path, topic):
        """--variant static switches the expansion variant."""
        result = runner.invoke(cli, ["--config", bench_config, "--out", str(tmp_path), "--variant", "static",
                                     "expand", "--query", topic])
        assert _records(result.stdout)[0]["variant"] == "static"

    def test_search_is_deterministic(self, runner, bench_config, tmp_path):
        """Two searches write byte-identical runs."""
        for name in ("a", "b"):
            result = runner.invoke(cli, ["--config", bench_config, "--out", str(tmp_path / name), "search"])
            assert result.exit_code == 0, result.stderr
        assert (tmp_path / "a" / "run.txt").read_bytes() == (tmp_path / "b" / "run.txt").read_bytes()
        first_line = (tmp_path / "a" / "run.txt").read_text(encoding="utf-8").splitlines()[0].split()
        assert first_line[1] == "Q0" and first_line[3] == "1" and first_line[5] == "temporal"

    def test_search_baseline_tag(self, runner, bench_config, tmp_path):
        """A baseline run is tagged 'baseline'."""
        result = runner.invoke(cli, ["--config", bench_config, "--out", str(tmp_path), "search", "--baseline"])
        payload = json.loads(result.stdout)
        assert payload["data"]["tag"] == "baseline"
        assert payload["data"]["queries"] == 10


class TestEvalCommand:
    """Tests for the eval command."""

    def test_ablation_and_sweep_rows(self, runner, bench_config, tmp_path):
        """One summary row per run: baseline, variant, ablation and each lambda."""
        result = runner.invoke(cli, ["--config", bench_config, "--out", str(tmp_path), "eval",
                                     "--ablate", "temprel", "--sweep-lambda", "0,1"])
        assert result.exit_code == 0, result.stderr
        summary = pd.read_csv(tmp_path / "eval.tsv", sep="\t")
        assert list(summary["run"]) == ["baseline", "temporal", "temporal-no-temprel",
                                        "temporal-lambda=0", "temporal-lambda=1"]
        assert (summary["queries"] == 10).all()
        assert os.path.exists(tmp_path / "eval_per_query.tsv")
        assert os.path.exists(tmp_path / "baseline_run.txt")

    def test_external_run(self, runner, bench_config, tmp_path):
        """--run scores an existing run file under its file name."""
        runner.invoke(cli, ["--config", bench_config, "--out", str(tmp_path / "first"), "search", "--baseline"])
        run_path = str(tmp_path / "first" / "run.txt")
        result = runner.invoke(cli, ["--config", bench_config, "--out", str(tmp_path / "second"),
                                     "eval", "--run", run_path])
        assert result.exit_code == 0, result.stderr
        summary = pd.read_csv(tmp_path / "second" / "eval.tsv", sep="\t")
        rows = summary.set_index("run")
        assert rows.loc["run.txt", "MAP"] == pytest.approx(rows.loc["baseline", "MAP"], abs=1e-4)

    def test_bad_sweep_value(self, runner, bench_config, tmp_path):
        """A lambda outside [0, 1] is a usage error."""
        result = runner.invoke(cli, ["--config", bench_config, "--out", str(tmp_path), "eval",
                                     "--sweep-lambda", "0,1.5"])
        assert result.exit_code == 2

    def test_needs_qrels(self, runner, toy_project):
        """Evaluating without a corpus, topics and qrels is a validation error."""
        result = runner.invoke(cli, ["--config", toy_project, "eval"])
        assert result.exit_code == 2


class TestParseLambdaValues:
    """Tests for parse_lambda_values."""

    def test_values(self):
        """Comma-separated values are parsed in order."""
        assert parse_lambda_values("0, 0.5,1") == [0.0, 0.5, 1.0]
        assert parse_lambda_values(None) == []

    @pytest.mark.parametrize("raw", ["0,x", "-0.1"])
    def test_invalid(self, raw):
        """Non-numbers and out-of-range values are rejected."""
        with pytest.raises(click.BadParameter):
            parse_lambda_values(raw)


class TestGroupOptions:
    """Tests for group-level behaviour."""

    def test_missing_config_file(self, runner, tmp_path):
        """A missing --config file exits with the not-found code."""
        result = runner.invoke(cli, ["--config", str(tmp_path / "none.json"), "classify", "--query", "x"])
        assert result.exit_code == 3
        payload = json.loads(result.stderr.strip().splitlines()[-1])
        assert payload["error"]["code"] == "NOT_FOUND"

    def test_make_benchmark_matches_seed(self, runner, tmp_path, benchmark_dir):
        """make-benchmark with seed 13 reproduces the session benchmark."""
        out = tmp_path / "bench"
        result = runner.invoke(cli, ["--out", str(tmp_path / "o"), "make-benchmark", "--out", str(out),
                                     "--seed", "13"])
        assert result.exit_code == 0, result.stderr
        for name in ("static.txt", "events.jsonl", "qrels.txt"):
            assert (out / name).read_bytes() == open(os.path.join(benchmark_dir, name), "rb").read()

    def test_make_benchmark_default_directory(self, runner, tmp_path):
        """Without --out the benchmark goes to the bundled data directory."""
        with patch("commands.benchmark.generate_benchmark", return_value={"config": "config.json"}) as gen:
            result = runner.invoke(cli, ["--out", str(tmp_path / "o"), "make-benchmark", "--seed", "5"])
        assert result.exit_code == 0, result.stderr
        gen.assert_called_once_with(DEFAULT_BENCHMARK_DIR, seed=5)

    def test_help_lists_commands(self, runner):
        """--help names every command."""
        result = runner.invoke(cli, ["--help"])
        for name in ("project", "classify", "detect", "expand", "search", "eval", "make-benchmark"):
            assert name in result.output
