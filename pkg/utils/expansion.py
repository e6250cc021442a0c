"""Event-driven query expansion (static and temporal variants).

Candidates for each detected event come from two sources: the event entry's
best TF-IDF terms and the vocabulary nearest to the query vector. Each
candidate is scored with a weighted sum of features, scores are merged over
events and normalized into the expansion distribution.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from utils.config import (
    ALPHA,
    BETA,
    DELTA,
    GAMMA,
    K_CANDIDATES,
    LAMBDA,
    N_EXPANSION_TERMS,
    TEMPREL_EPSILON,
    TEMPREL_K,
)
from utils.detection import DetectedEvent, DetectionConfig, Query, detect_for_query
from utils.errors import ConfigError, OutOfVocabularyError, ZeroNormError
from utils.eventstore import EventRecord, TfIdfModel, stem_tfidf, top_tfidf_terms
from utils.logger import get_logger
from utils.text_analysis import split_words
from utils.vecspace import EmbeddingModel, ModelBundle, TemporalModelSet, cosine, knn

logger = get_logger()

FEATURES = ("tfidf", "cos_ce", "cos_eq", "temprel", "cos_cq")


class ExpansionVariant(str, Enum):
    STATIC = "static"
    TEMPORAL = "temporal"


class MergePolicy(str, Enum):
    MAX = "max"
    SUM = "sum"


class CandidateSource(str, Enum):
    TFIDF = "tfidf"
    SIMILARITY = "similarity"
    BOTH = "both"


@dataclass
class ExpansionConfig:
    lambda_: float = LAMBDA
    k_candidates: int = K_CANDIDATES
    alpha: float = ALPHA
    beta: float = BETA
    gamma: float = GAMMA
    delta: float = DELTA
    variant: ExpansionVariant = ExpansionVariant.TEMPORAL
    n_expansion_terms: int = N_EXPANSION_TERMS
    temprel_k: int = TEMPREL_K
    temprel_epsilon: float = TEMPREL_EPSILON
    merge: MergePolicy = MergePolicy.MAX
    disabled_features: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        self.variant = ExpansionVariant(self.variant)
        self.merge = MergePolicy(self.merge)
        self.disabled_features = tuple(sorted(set(self.disabled_features)))
        if not 0.0 <= self.lambda_ <= 1.0:
            raise ConfigError(f"lambda must lie in [0, 1], got {self.lambda_}")
        if self.k_candidates < 1 or self.n_expansion_terms < 1 or self.temprel_k < 1:
            raise ConfigError("k_candidates, n_expansion_terms and temprel_k must be >= 1")
        unknown = set(self.disabled_features) - set(FEATURES)
        if unknown:
            raise ConfigError(f"unknown feature(s): {', '.join(sorted(unknown))}")

    def enabled(self, feature: str) -> bool:
        return feature not in self.disabled_features

    @property
    def candidate_split(self) -> Tuple[int, int]:
        """(TF-IDF side, similarity side) candidate counts."""
        if not self.enabled("cos_cq"):
            return self.k_candidates, 0
        n_tfidf = math.ceil(round(self.lambda_ * self.k_candidates, 9))
        return n_tfidf, self.k_candidates - n_tfidf

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["lambda"] = data.pop("lambda_")
        data["variant"] = self.variant.value
        data["merge"] = self.merge.value
        data["disabled_features"] = list(self.disabled_features)
        return data


@dataclass
class CandidateFeatures:
    tfidf: float = 0.0
    cos_ce: float = 0.0
    cos_eq: float = 0.0
    temprel: Optional[float] = None


@dataclass
class Candidate:
    term: str
    stem: str
    source_event: str
    source: CandidateSource = CandidateSource.TFIDF
    features: CandidateFeatures = field(default_factory=CandidateFeatures)
    score: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "term": self.term,
            "source_event": self.source_event,
            "source": self.source.value,
            "features": asdict(self.features),
            "score": self.score,
        }


@dataclass
class ExpandedQuery:
    original: Query
    weights: Dict[str, float] = field(default_factory=dict)
    variant: ExpansionVariant = ExpansionVariant.TEMPORAL
    events: List[DetectedEvent] = field(default_factory=list)
    candidates: List[Candidate] = field(default_factory=list)

    def to_dict(self, explain: bool = False) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "query": self.original.raw,
            "variant": self.variant.value,
            "terms": [[term, weight] for term, weight in self.weights.items()],
            "events": [d.to_dict() for d in self.events],
        }
        if explain:
            data["candidates"] = [c.to_dict() for c in self.candidates]
        return data


# =============================================================================
# Query and model helpers
# =============================================================================

def query_vector(q: Query, model: EmbeddingModel) -> np.ndarray:
    """Unit-normalized mean of the query terms' vectors; OOV terms are skipped."""
    vectors = []
    for term in q.terms:
        vec = model.get(term)
        if vec is None:
            logger.debug(f"Query term '{term}' not in model {model.label}")
            continue
        vectors.append(vec)
    if not vectors:
        raise OutOfVocabularyError(" ".join(q.terms) or q.raw, model.label)
    mean = np.mean(vectors, axis=0)
    norm = float(np.linalg.norm(mean))
    if norm == 0.0:
        raise ZeroNormError("query vector")
    return mean / norm


def event_model(e: DetectedEvent, config: ExpansionConfig, models: ModelBundle) -> EmbeddingModel:
    if config.variant == ExpansionVariant.STATIC:
        return models.static
    return models.model_for_year(e.year, fallback=True)


def _is_candidate_word(token: str, tfstats: TfIdfModel) -> bool:
    # a single word once lower-cased, and not a stop word
    word = token.lower()
    return split_words(token) == [word] and not tfstats.analyzer.is_stop_word(word)


# =============================================================================
# Candidates
# =============================================================================

def candidates_for_event(e: DetectedEvent, q: Query, config: ExpansionConfig,
                         models: ModelBundle, tfstats: TfIdfModel) -> List[Candidate]:
    """TF-IDF terms of the event entry united with the query's nearest words, deduped by stem."""
    n_tfidf, n_sim = config.candidate_split
    query_stems = {tfstats.stem(term) for term in q.terms}
    event_id = e.event.id
    picked: Dict[str, Candidate] = {}

    if n_tfidf > 0 and e.event.id in tfstats:
        counts, _ = tfstats.counts_for(e.event)
        for stem, _score in top_tfidf_terms(e.event, len(counts), tfstats):
            if len(picked) >= n_tfidf:
                break
            surface = tfstats.surface_form(stem)
            if stem in query_stems or tfstats.analyzer.is_stop_word(surface):
                continue
            picked[stem] = Candidate(term=surface, stem=stem, source_event=event_id,
                                     source=CandidateSource.TFIDF)

    if n_sim > 0:
        model = event_model(e, config, models)
        try:
            qvec = query_vector(q, model)
        except (OutOfVocabularyError, ZeroNormError):
            logger.debug(f"No query vector in model {model.label}; similarity candidates skipped")
            qvec = None

        seen_stems = set()

        def admissible(token: str) -> bool:
            # one neighbour per stem, so "War" and "wars" fill a single slot
            if not _is_candidate_word(token, tfstats):
                return False
            stem = tfstats.stem(token)
            if stem in query_stems or stem in seen_stems or stem not in tfstats.document_frequency:
                return False
            seen_stems.add(stem)
            return True

        if qvec is not None:
            for token, _sim in knn(model, qvec, n_sim, token_filter=admissible):
                stem = tfstats.stem(token)
                if stem in picked:
                    picked[stem].source = CandidateSource.BOTH
                else:
                    picked[stem] = Candidate(term=token.lower(), stem=stem, source_event=event_id,
                                             source=CandidateSource.SIMILARITY)

    return list(picked.values())


# =============================================================================
# Features and scoring
# =============================================================================

def _warn_missing_model(year: int, missing_years: Optional[Set[int]]) -> None:
    if missing_years is not None:
        if year in missing_years:
            return
        missing_years.add(year)
    logger.warning(f"No temporal model for {year}; TempRel is neutral", extra={'year': year})


def temprel(c: str, e: DetectedEvent, temporal_set: TemporalModelSet, k: int = TEMPREL_K,
            query_terms: Sequence[str] = (), epsilon: float = TEMPREL_EPSILON,
            missing_years: Optional[Set[int]] = None) -> float:
    """Average ratio cos_t(c, n) / cos_{t-1}(c, n) over the event's year-t neighbors n.

    Neutral 1.0 when a year model is missing or no neighbor is usable. A missing
    year is warned about once per ``missing_years`` set, or on every call without one.
    """
    year = e.year
    current = temporal_set.get(year)
    previous = temporal_set.get(year - 1)
    if current is None:
        _warn_missing_model(year, missing_years)
        return 1.0
    if previous is None:
        _warn_missing_model(year - 1, missing_years)
        return 1.0

    event_token = current.resolve(e.event.token)
    c_now = current.get(c)
    c_before = previous.get(c)
    if event_token is None or c_now is None or c_before is None:
        return 1.0

    excluded = {term.lower() for term in query_terms}
    neighbors = knn(current, event_token, k, token_filter=lambda tok: tok.lower() not in excluded)

    ratios = []
    for neighbor, _sim in neighbors:
        n_now = current.get(neighbor)
        n_before = previous.get(neighbor)
        if n_before is None:
            continue
        try:
            before = cosine(c_before, n_before)
            if before <= epsilon:
                continue
            ratios.append(cosine(c_now, n_now) / before)
        except ZeroNormError:
            continue
    if not ratios:
        return 1.0
    return sum(ratios) / len(ratios)


def _safe_cosine(model: EmbeddingModel, a: str, b: Optional[np.ndarray] = None,
                 b_token: Optional[str] = None) -> float:
    va = model.get(a)
    vb = b if b is not None else (model.get(b_token) if b_token is not None else None)
    if va is None or vb is None:
        return 0.0
    try:
        return cosine(va, vb)
    except ZeroNormError:
        return 0.0


def compute_features(c: Candidate, e: DetectedEvent, q: Query, config: ExpansionConfig,
                     models: ModelBundle, tfstats: TfIdfModel,
                     missing_years: Optional[Set[int]] = None) -> CandidateFeatures:
    """Feature values for one candidate; OOV similarities are 0, disabled features 0."""
    model = event_model(e, config, models)
    features = CandidateFeatures()
    if config.enabled("tfidf") and e.event.id in tfstats:
        features.tfidf = stem_tfidf(c.stem, e.event, tfstats)
    if config.enabled("cos_ce"):
        features.cos_ce = _safe_cosine(model, c.term, b_token=e.event.token)
    if config.enabled("cos_eq"):
        try:
            qvec = query_vector(q, model)
            features.cos_eq = _safe_cosine(model, e.event.token, b=qvec)
        except (OutOfVocabularyError, ZeroNormError):
            features.cos_eq = 0.0
    if config.variant == ExpansionVariant.TEMPORAL:
        if config.enabled("temprel"):
            features.temprel = temprel(c.term, e, models.temporal, config.temprel_k,
                                       q.terms, config.temprel_epsilon, missing_years)
        else:
            features.temprel = 0.0
    return features


def combine_features(features: CandidateFeatures, config: ExpansionConfig) -> float:
    score = (config.alpha * features.tfidf
             + config.beta * features.cos_ce
             + config.gamma * features.cos_eq)
    if config.variant == ExpansionVariant.TEMPORAL and features.temprel is not None:
        score += config.delta * features.temprel
    return score


def score_candidate(c: Candidate, e: DetectedEvent, q: Query, config: ExpansionConfig,
                    models: ModelBundle, tfstats: TfIdfModel,
                    missing_years: Optional[Set[int]] = None) -> float:
    """Compute and store the candidate's features, returning its weighted score."""
    c.features = compute_features(c, e, q, config, models, tfstats, missing_years)
    c.score = combine_features(c.features, config)
    return c.score


# =============================================================================
# Expansion
# =============================================================================

def normalize_scores(scores: Dict[str, float], limit: int) -> Dict[str, float]:
    """Top ``limit`` positive scores (ties by term) scaled to sum to one."""
    ranked = sorted(((t, s) for t, s in scores.items() if s > 0), key=lambda item: (-item[1], item[0]))
    ranked = ranked[:limit]
    total = sum(s for _, s in ranked)
    if total <= 0:
        return {}
    return {term: s / total for term, s in ranked}


def expand(q: Query, config: ExpansionConfig, events: Sequence[EventRecord],
           models: ModelBundle, tfstats: TfIdfModel,
           detection_config: Optional[DetectionConfig] = None,
           detected: Optional[List[DetectedEvent]] = None) -> ExpandedQuery:
    """Detect events, score their candidates and merge into a weighted expansion."""
    if detected is None:
        detected = detect_for_query(q, events, detection_config or DetectionConfig(), models, tfstats)
    expanded = ExpandedQuery(original=q, variant=config.variant, events=list(detected))
    if not detected:
        logger.info(f"No events detected for '{q.raw}'; query left unexpanded")
        return expanded

    merged: Dict[str, float] = {}
    best: Dict[str, Candidate] = {}
    missing_years: Set[int] = set()
    for e in sorted(detected, key=lambda d: d.event.id):
        for candidate in candidates_for_event(e, q, config, models, tfstats):
            score = max(0.0, score_candidate(candidate, e, q, config, models, tfstats, missing_years))
            candidate.score = score
            expanded.candidates.append(candidate)

            stem = candidate.stem
            if config.merge == MergePolicy.SUM:
                merged[stem] = merged.get(stem, 0.0) + score
            else:
                merged[stem] = max(merged.get(stem, 0.0), score)
            current = best.get(stem)
            if (current is None or score > current.score
                    or (score == current.score and candidate.term < current.term)):
                best[stem] = candidate

    by_term = {best[stem].term: score for stem, score in merged.items()}
    expanded.weights = normalize_scores(by_term, config.n_expansion_terms)

    logger.debug(
        f"Expanded '{q.raw}' with {len(expanded.weights)} terms",
        extra={'events': len(detected), 'candidates': len(expanded.candidates),
               'variant': config.variant.value}
    )
    return expanded
