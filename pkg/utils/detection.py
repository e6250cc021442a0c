"""Event detection for queries and event-related query classification."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

from utils.config import (
    FREQUENCY_CLASSIFY_THRESHOLD,
    MAX_EVENTS_PER_TERM,
    MIN_SCORE,
    MIN_SURFACE_OCCURRENCES,
    MU,
)
from utils.errors import ConfigError, EventDataError, OutOfVocabularyError, ZeroNormError
from utils.eventstore import EventRecord, TfIdfModel, surface_count, term_frequency
from utils.logger import get_logger
from utils.text_analysis import Analyzer, default_analyzer
from utils.vecspace import ModelBundle, similarity

logger = get_logger()


# =============================================================================
# Types
# =============================================================================

class ScorerType(str, Enum):
    SIMILARITY = "similarity"
    FREQUENCY = "frequency"


class EmbeddingSource(str, Enum):
    STATIC = "static"
    TEMPORAL = "temporal"


class Aggregation(str, Enum):
    MEAN = "mean"
    MAX = "max"


@dataclass
class Query:
    """A raw query string and its stopped, lower-cased terms in order."""
    raw: str
    terms: List[str] = field(default_factory=list)

    @classmethod
    def from_text(cls, raw: str, analyzer: Optional[Analyzer] = None) -> "Query":
        analyzer = analyzer or default_analyzer()
        return cls(raw=raw, terms=analyzer.surface_tokens(raw))

    @property
    def unique_terms(self) -> List[str]:
        return list(dict.fromkeys(self.terms))


@dataclass
class DetectionConfig:
    scorer: ScorerType = ScorerType.FREQUENCY
    min_score: float = MIN_SCORE
    similarity_min_score: float = MIN_SCORE
    mu: float = MU
    max_events_per_term: int = MAX_EVENTS_PER_TERM
    embedding_source: EmbeddingSource = EmbeddingSource.STATIC
    aggregation: Aggregation = Aggregation.MEAN
    min_surface_occurrences: int = MIN_SURFACE_OCCURRENCES

    def __post_init__(self) -> None:
        self.scorer = ScorerType(self.scorer)
        self.embedding_source = EmbeddingSource(self.embedding_source)
        self.aggregation = Aggregation(self.aggregation)
        if self.min_score <= 0 or self.similarity_min_score <= 0:
            raise ConfigError("min_score must be positive")
        if not 0.0 <= self.mu <= 1.0:
            raise ConfigError(f"mu must lie in [0, 1], got {self.mu}")
        if self.max_events_per_term < 1:
            raise ConfigError("max_events_per_term must be >= 1")

    @property
    def threshold(self) -> float:
        if self.scorer == ScorerType.SIMILARITY:
            return self.similarity_min_score
        return self.min_score

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key in ("scorer", "embedding_source", "aggregation"):
            data[key] = getattr(self, key).value
        return data


@dataclass
class DetectedEvent:
    event: EventRecord
    score: float
    year: int
    scorer: ScorerType = ScorerType.FREQUENCY
    term_scores: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "event": self.event.name,
            "event_id": self.event.id,
            "year": self.year,
            "score": self.score,
            "scorer": self.scorer.value,
            "term_scores": dict(sorted(self.term_scores.items())),
        }


# =============================================================================
# Scoring
# =============================================================================

def score_event_for_term(w: str, e: EventRecord, config: DetectionConfig,
                         models: Optional[ModelBundle] = None,
                         tfstats: Optional[TfIdfModel] = None) -> float:
    if config.scorer == ScorerType.FREQUENCY:
        if surface_count(w, e, tfstats) < config.min_surface_occurrences:
            return 0.0
        try:
            return term_frequency(w, e, tfstats)
        except EventDataError:
            return 0.0

    if models is None:
        raise ConfigError("the similarity scorer needs embedding models")
    if config.embedding_source == EmbeddingSource.TEMPORAL:
        model = models.temporal.get(e.year)
        if model is None:
            logger.debug(f"No model for {e.year}; '{e.name}' scores 0")
            return 0.0
    else:
        model = models.static
    try:
        return similarity(model, w, e.token)
    except (OutOfVocabularyError, ZeroNormError) as exc:
        logger.debug(f"Similarity skipped: {exc.message}", extra={'term': w, 'event': e.token})
        return 0.0


def detect_for_term(w: str, events: Sequence[EventRecord], config: DetectionConfig,
                    models: Optional[ModelBundle] = None,
                    tfstats: Optional[TfIdfModel] = None) -> List[DetectedEvent]:
    """Events scoring above the threshold for ``w``, best first, at most max_events_per_term."""
    threshold = config.threshold
    detected = []
    for event in events:
        score = score_event_for_term(w, event, config, models, tfstats)
        if score > threshold:
            detected.append(DetectedEvent(event=event, score=score, year=event.year,
                                          scorer=config.scorer, term_scores={w: score}))
    detected.sort(key=lambda d: (-d.score, d.event.id))
    return detected[:config.max_events_per_term]


def _apply_mu_filter(candidates: List[DetectedEvent], mu: float) -> List[DetectedEvent]:
    by_year: Dict[int, List[DetectedEvent]] = defaultdict(list)
    for candidate in candidates:
        by_year[candidate.year].append(candidate)
    kept = []
    for year_events in by_year.values():
        top = max(d.score for d in year_events)
        kept.extend(d for d in year_events if d.score > mu * top or d.score == top)
    return kept


def detect_for_query(q: Query, events: Sequence[EventRecord], config: DetectionConfig,
                     models: Optional[ModelBundle] = None,
                     tfstats: Optional[TfIdfModel] = None) -> List[DetectedEvent]:
    """Majority rule over the per-term sets, then the per-year mu filter."""
    terms = q.unique_terms
    if not terms:
        return []

    hits: Dict[str, Dict[str, float]] = defaultdict(dict)
    records: Dict[str, EventRecord] = {}
    for term in terms:
        for detected in detect_for_term(term, events, config, models, tfstats):
            hits[detected.event.id][term] = detected.score
            records[detected.event.id] = detected.event

    survivors = []
    for event_id, term_scores in hits.items():
        if len(term_scores) * 2 <= len(terms):
            continue
        scores = list(term_scores.values())
        if config.aggregation == Aggregation.MAX:
            score = max(scores)
        else:
            score = sum(scores) / len(scores)
        event = records[event_id]
        survivors.append(DetectedEvent(event=event, score=score, year=event.year,
                                       scorer=config.scorer, term_scores=dict(term_scores)))

    result = _apply_mu_filter(survivors, config.mu)
    result.sort(key=lambda d: (-d.score, d.event.id))
    logger.debug(
        f"Detected {len(result)} events for '{q.raw}'",
        extra={'terms': len(terms), 'majority_survivors': len(survivors)}
    )
    return result


def classify_event_related(q: Query, events: Sequence[EventRecord],
                           tfstats: Optional[TfIdfModel] = None,
                           threshold: float = FREQUENCY_CLASSIFY_THRESHOLD) -> bool:
    """True when most query terms exceed ``threshold`` frequency in some event entry."""
    terms = q.unique_terms
    if not terms:
        return False

    qualifying = 0
    for term in terms:
        for event in events:
            try:
                if term_frequency(term, event, tfstats) > threshold:
                    qualifying += 1
                    break
            except EventDataError:
                continue
    return qualifying * 2 > len(terms)
