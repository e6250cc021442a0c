"""
Tests for utils/benchmark.py - The synthetic benchmark generator.
"""
import os

from utils.benchmark import BenchmarkSettings, build_benchmark
from utils.eventstore import filter_events, load_events
from utils.pipeline import load_pipeline_config
from utils.text_analysis import default_analyzer
from utils.trec import parse_qrels, parse_trec_topics


class TestBuildBenchmark:
    """Tests for build_benchmark."""

    def test_same_seed_same_benchmark(self):
        """A seed fully determines the benchmark."""
        a, b = build_benchmark(seed=5), build_benchmark(seed=5)
        assert a.static.tokens == b.static.tokens
        assert (a.static.matrix == b.static.matrix).all()
        assert a.documents == b.documents
        assert a.qrels == b.qrels

    def test_different_seed(self):
        """Different seeds give different corpora."""
        assert build_benchmark(seed=1).documents != build_benchmark(seed=2).documents

    def test_shape(self):
        """Topic, event, document and year counts follow the settings."""
        settings = BenchmarkSettings(n_topics=4, extra_events=2, background_docs=10)
        bench = build_benchmark(seed=3, settings=settings)
        assert len(bench.topics) == 4
        assert len(bench.events) == 4 + 2 + 2
        assert len(bench.documents) == 4 * (10 + 5) + 10
        assert bench.temporal.years == list(range(1984, 1985 + 3 * 2 + 1))

    def test_filters_drop_two_records(self):
        """Exactly the two planted records fail the dataset filters."""
        bench = build_benchmark(seed=3)
        kept = filter_events(bench.events)
        assert sorted(e.id for e in bench.events if e not in kept) == ["E901", "E902"]

    def test_words_survive_stemming(self):
        """Generated words are their own stems and never stop-words."""
        bench = build_benchmark(seed=3)
        analyzer = default_analyzer()
        for _qid, title in bench.topics:
            for word in title.split():
                assert analyzer.stem(word) == word
                assert not analyzer.is_stop_word(word)

    def test_event_tokens_only_in_static(self):
        """Year models hold words only; events enter them by projection."""
        bench = build_benchmark(seed=3)
        year = bench.events[0].year
        assert bench.events[0].token in bench.static
        assert bench.events[0].token not in bench.temporal.get(year)


class TestGenerateBenchmark:
    """Tests for the files generate_benchmark writes."""

    def test_files_and_config(self, benchmark_dir):
        """Every input exists and the config points at it."""
        config = load_pipeline_config(os.path.join(benchmark_dir, "config.json"))
        for key in ("static_model", "temporal_dir", "events", "corpus", "topics", "qrels"):
            assert os.path.exists(getattr(config.paths, key))
        assert config.paths.enriched_dir == os.path.join(benchmark_dir, "enriched")
        assert config.seed == 13

    def test_topics_and_qrels_agree(self, benchmark_dir):
        """Every topic has relevant and non-relevant judgments."""
        topics = parse_trec_topics(os.path.join(benchmark_dir, "topics.txt"))
        qrels = parse_qrels(os.path.join(benchmark_dir, "qrels.txt"))
        for qid, _query in topics:
            grades = [grade for (q, _doc), grade in qrels.items() if q == qid]
            assert grades.count(1) == 10
            assert grades.count(0) == 5 + 3

    def test_events_load(self, benchmark_dir):
        """The events file reads back without errors."""
        events = load_events(os.path.join(benchmark_dir, "events.jsonl"))
        assert len(events) == 10 + 5 + 2
