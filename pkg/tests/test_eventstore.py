"""
Tests for utils/eventstore.py - Event dataset IO, filters and TF-IDF statistics.
"""
import json
import math

import numpy as np
import pytest

from utils.errors import EventDataError, InputNotFoundError
from utils.eventstore import (
    build_tfidf,
    filter_events,
    load_events,
    normalize_name,
    read_events,
    stem_tfidf,
    term_frequency,
    tfidf,
    top_tfidf_terms,
    write_events,
)
from utils.text_analysis import default_analyzer


def _record(i, **overrides):
    data = {
        "id": f"E{i}", "name": f"{1990 + i} Event {i}", "year": 1990 + i,
        "entry_text": "war and peace", "monthly_views": 9000, "external_refs": 30,
    }
    data.update(overrides)
    return data


class TestNormalizeName:
    """Tests for normalize_name."""

    @pytest.mark.parametrize("name,expected", [
        ("1989 Tiananmen Square protests", "Tiananmen Square protests"),
        ("World War II", "World War II"),
        ("2000 Camp David Summit", "Camp David Summit"),
        ("Summit of  2000   in Camp David", "Summit of in Camp David"),
        ("3000 Leagues", "3000 Leagues"),
        ("September 11 attacks", "September 11 attacks"),
    ])
    def test_strips_standalone_years(self, name, expected):
        """Only standalone 4-digit years in 1000-2999 are dropped."""
        assert normalize_name(name) == expected

    def test_only_year_is_error(self):
        """A name that is only a year has nothing left."""
        with pytest.raises(EventDataError):
            normalize_name("1999")

    def test_empty_is_error(self):
        """An empty name is an error."""
        with pytest.raises(EventDataError):
            normalize_name("  ")

    def test_idempotent(self):
        """Normalizing a normalized name changes nothing."""
        rng = np.random.default_rng(31)
        words = ["Gulf", "War", "1991", "Summit", "2000", "of", "3000", "11", "Camp", "1989"]
        for _ in range(100):
            parts = ["Event"] + list(rng.choice(words, size=int(rng.integers(1, 6))))
            rng.shuffle(parts)
            name = " ".join(parts)
            once = normalize_name(name)
            assert normalize_name(once) == once


class TestReadEvents:
    """Tests for read_events and load_events."""

    def test_well_formed_file(self, write_events):
        """Three good lines give three records."""
        events = load_events(write_events([_record(i) for i in range(3)]))
        assert [e.id for e in events] == ["E0", "E1", "E2"]
        assert events[1].normalized_name == "Event 1"
        assert events[1].token == "1991_Event_1"

    def test_missing_field_is_per_line_error(self, write_events):
        """A record without a year is reported; the rest load."""
        bad = _record(1)
        del bad["year"]
        result = read_events(write_events([_record(0), bad, _record(2)]))
        assert [e.id for e in result.events] == ["E0", "E2"]
        assert result.errors[0][0] == 2
        assert "year" in result.errors[0][1]

    def test_invalid_json_and_duplicates(self, write_events):
        """Broken JSON and repeated ids are per-line errors."""
        result = read_events(write_events([_record(0), "{not json", _record(0)]))
        assert len(result.events) == 1
        assert [line for line, _ in result.errors] == [2, 3]

    def test_negative_views_rejected(self, write_events):
        """Negative popularity statistics are invalid."""
        result = read_events(write_events([_record(0, monthly_views=-1)]))
        assert result.events == []

    def test_invalid_utf8_is_per_line_error(self, tmp_path):
        """A line that is not UTF-8 is reported; the other lines load."""
        path = tmp_path / "events.jsonl"
        lines = [json.dumps(_record(0)).encode("utf-8"), b'{"id": "\xff\xfe"}',
                 json.dumps(_record(2)).encode("utf-8")]
        path.write_bytes(b"\n".join(lines) + b"\n")
        result = read_events(str(path))
        assert [e.id for e in result.events] == ["E0", "E2"]
        assert result.errors[0][0] == 2
        assert "UTF-8" in result.errors[0][1]

    def test_missing_file(self, tmp_path):
        """A missing dataset is a not-found error."""
        with pytest.raises(InputNotFoundError):
            read_events(str(tmp_path / "none.jsonl"))

    def test_write_then_load(self, tmp_path, event_factory):
        """Written events load back unchanged."""
        events = [event_factory(name="1991 Gulf War", year=1991, entry_text="desert storm")]
        path = str(tmp_path / "events.jsonl")
        write_events(events, path)
        assert load_events(path) == events


class TestFilterEvents:
    """Tests for the dataset filters."""

    def test_views_boundary_is_strict(self, event_factory):
        """Exactly 5000 views is not over 5000."""
        assert filter_events([event_factory(monthly_views=5000.0)]) == []

    def test_refs_boundary_is_strict(self, event_factory):
        """Exactly 15 references is not over 15."""
        assert filter_events([event_factory(external_refs=15)]) == []

    def test_year_outside_range(self, event_factory):
        """Events in 1980 fall outside the corpus."""
        assert filter_events([event_factory(year=1980)]) == []

    def test_retained(self, event_factory):
        """6000 views, 20 refs and 1995 pass."""
        event = event_factory(monthly_views=6000.0, external_refs=20, year=1995)
        assert filter_events([event]) == [event]

    def test_empty_entry_dropped(self, event_factory):
        """Events with an empty entry are dropped."""
        assert filter_events([event_factory(entry_text="   ")]) == []

    def test_idempotent_and_order_preserving(self, event_factory):
        """Filtering twice equals filtering once and keeps the input order."""
        rng = np.random.default_rng(32)
        events = [
            event_factory(
                monthly_views=float(rng.integers(3000, 8000)),
                external_refs=int(rng.integers(10, 25)),
                year=int(rng.integers(1985, 2010)),
            )
            for _ in range(60)
        ]
        once = filter_events(events)
        assert filter_events(once) == once
        positions = [events.index(event) for event in once]
        assert positions == sorted(positions)


class TestTermFrequency:
    """Tests for term_frequency."""

    def test_three_hits_in_hundred(self, event_factory):
        """3 stemmed hits in 100 tokens give 0.03."""
        text = " ".join(["bombing", "bombings", "bomb"] + ["filler"] * 97)
        assert term_frequency("bombs", event_factory(entry_text=text)) == pytest.approx(0.03)

    def test_absent_word(self, event_factory):
        """A missing word has frequency 0."""
        assert term_frequency("peace", event_factory(entry_text="war war")) == 0.0

    def test_only_that_word(self, event_factory):
        """An entry of one repeated word gives 1.0."""
        assert term_frequency("war", event_factory(entry_text="war war war")) == 1.0

    def test_uses_model_counts(self, event_factory):
        """With a TF-IDF model the cached counts give the same answer."""
        event = event_factory(entry_text="war peace war")
        model = build_tfidf([event])
        assert term_frequency("wars", event, model) == pytest.approx(2 / 3)

    def test_empty_entry(self, event_factory):
        """An entry with no tokens is an error."""
        with pytest.raises(EventDataError):
            term_frequency("war", event_factory(entry_text="the of"))

    def test_sums_to_one_over_distinct_stems(self, event_factory):
        """Summed over one word per distinct stem, frequencies add up to 1."""
        rng = np.random.default_rng(33)
        vocabulary = ["war", "wars", "peace", "treaty", "bombing", "bomb", "desert",
                      "storm", "the", "of", "protests", "summit"]
        analyzer = default_analyzer()
        for _ in range(20):
            text = " ".join(rng.choice(vocabulary, size=int(rng.integers(5, 40))))
            event = event_factory(entry_text="summit " + text)
            by_stem = {}
            for word in analyzer.surface_tokens(event.entry_text):
                by_stem.setdefault(analyzer.stem(word), word)
            total = sum(term_frequency(word, event) for word in by_stem.values())
            assert total == pytest.approx(1.0, rel=0, abs=1e-9)


class TestTfIdf:
    """Tests for build_tfidf, tfidf and top_tfidf_terms."""

    def _events(self, event_factory):
        return [
            event_factory(event_id="A", entry_text="war tanks war soldiers"),
            event_factory(event_id="B", entry_text="war peace treaty"),
            event_factory(event_id="C", entry_text="flood rain river rain"),
            event_factory(event_id="D", entry_text="election votes"),
            event_factory(event_id="E", entry_text="floods river dam"),
        ]

    def test_hand_tabulated_counts(self, event_factory):
        """Document frequencies and per-event counts match a hand tally."""
        model = build_tfidf(self._events(event_factory))
        assert model.num_documents == 5
        assert model.document_frequency["war"] == 2
        assert model.document_frequency["flood"] == 2
        assert model.document_frequency["river"] == 2
        assert model.document_frequency["treati"] == 1
        counts, total = model.counts_for(self._events(event_factory)[0])
        assert counts["war"] == 2
        assert total == 4

    def test_token_in_every_document_scores_zero(self, event_factory):
        """idf of a universal token is ln(1) = 0."""
        events = [event_factory(entry_text="news war"), event_factory(entry_text="news peace")]
        model = build_tfidf(events)
        assert tfidf("news", events[0], model) == 0.0

    def test_absent_word_scores_zero(self, event_factory):
        """A word missing from the entry scores 0."""
        events = self._events(event_factory)
        assert tfidf("election", events[0], build_tfidf(events)) == 0.0

    def test_hand_computation(self, event_factory):
        """tf 0.1 in one of three documents gives 0.1 * ln 3."""
        events = [
            event_factory(entry_text="quake " + " ".join(["ground"] * 9)),
            event_factory(entry_text="ground water"),
            event_factory(entry_text="ground fire"),
        ]
        model = build_tfidf(events)
        assert tfidf("quake", events[0], model) == pytest.approx(0.1099, abs=1e-4)
        assert stem_tfidf("quak", events[0], model) == pytest.approx(0.1 * math.log(3))

    def test_top_terms_match_brute_force(self, event_factory):
        """top_tfidf_terms is a full sort of all stem scores, ties by stem."""
        events = self._events(event_factory)
        model = build_tfidf(events)
        counts, _ = model.counts_for(events[2])
        brute = sorted(((s, stem_tfidf(s, events[2], model)) for s in counts),
                       key=lambda item: (-item[1], item[0]))
        assert top_tfidf_terms(events[2], 10, model) == brute
        assert top_tfidf_terms(events[2], 2, model) == brute[:2]

    def test_top_terms_n_zero(self, event_factory):
        """n=0 gives an empty list."""
        events = self._events(event_factory)
        assert top_tfidf_terms(events[0], 0, build_tfidf(events)) == []

    def test_surface_form_most_frequent(self, event_factory):
        """Each stem remembers its most frequent spelling, ties lexicographic."""
        events = [event_factory(entry_text="floods flooding floods flooded")]
        model = build_tfidf(events)
        assert model.surface_form("flood") == "floods"

    def test_zero_events_is_error(self):
        """A TF-IDF model needs at least one entry."""
        with pytest.raises(EventDataError):
            build_tfidf([])
