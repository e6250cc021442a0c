"""
Pytest configuration and shared fixtures: event, model and file factories.
"""
import json
import os

import numpy as np
import pytest

from utils.eventstore import EventRecord, normalize_name
from utils.run_id import end_run
from utils.vecspace import EmbeddingModel, save_model


@pytest.fixture(autouse=True)
def clear_run_id():
    """Every test starts and ends outside a run."""
    end_run()
    yield
    end_run()


@pytest.fixture
def event_factory():
    """Build EventRecord objects with popular, in-range defaults."""
    counter = {"n": 0}

    def make(name=None, entry_text="war peace treaty", year=1990, event_id=None,
             monthly_views=10000.0, external_refs=50):
        counter["n"] += 1
        name = name or f"{year} Event {counter['n']}"
        return EventRecord(
            id=event_id or f"E{counter['n']:03d}",
            name=name,
            normalized_name=normalize_name(name),
            year=year,
            entry_text=entry_text,
            monthly_views=monthly_views,
            external_refs=external_refs,
        )

    return make


@pytest.fixture
def model_factory():
    """Build an EmbeddingModel from a {token: vector} mapping."""
    def make(vectors, label="static"):
        tokens = list(vectors)
        matrix = np.array([vectors[t] for t in tokens], dtype=np.float64)
        dim = matrix.shape[1] if len(tokens) else 2
        return EmbeddingModel(label, dim, tokens, matrix if len(tokens) else None)

    return make


@pytest.fixture
def random_model():
    """Seeded random model of ``size`` tokens named w000, w001, ..."""
    def make(size=50, dim=8, seed=0, label="static"):
        rng = np.random.default_rng(seed)
        tokens = [f"w{i:03d}" for i in range(size)]
        return EmbeddingModel(label, dim, tokens, rng.standard_normal((size, dim)))

    return make


@pytest.fixture
def write_model(tmp_path):
    """Write a model (or raw text) to a file under tmp_path and return the path."""
    def write(model_or_text, name="model.txt"):
        path = tmp_path / name
        path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(model_or_text, str):
            path.write_text(model_or_text, encoding="utf-8")
        else:
            save_model(model_or_text, str(path))
        return str(path)

    return write


@pytest.fixture
def write_events(tmp_path):
    """Write event dicts (or records) as JSONL and return the path."""
    def write(records, name="events.jsonl"):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as handle:
            for record in records:
                if isinstance(record, EventRecord):
                    record = record.to_dict()
                    record.pop("normalized_name")
                handle.write((record if isinstance(record, str) else json.dumps(record)) + "\n")
        return str(path)

    return write


@pytest.fixture(scope="session")
def benchmark_dir(tmp_path_factory):
    """The synthetic benchmark written once per session."""
    from utils.benchmark import generate_benchmark

    out = tmp_path_factory.mktemp("benchmark")
    generate_benchmark(str(out), seed=13)
    return str(out)


def load_json_lines(path):
    with open(path, encoding="utf-8") as handle:
        return [json.loads(line) for line in handle if line.strip()]


@pytest.fixture
def read_jsonl():
    return load_json_lines

