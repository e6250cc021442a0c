"""Event dataset ingestion, filtering, name normalization and TF-IDF statistics."""
from __future__ import annotations

import json
import math
import os
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from utils.config import MIN_REFS, MIN_VIEWS, YEAR_MAX, YEAR_MIN
from utils.errors import EventDataError, InputNotFoundError
from utils.logger import get_logger
from utils.text_analysis import Analyzer, default_analyzer, split_words

logger = get_logger()

REQUIRED_FIELDS = ("id", "name", "year", "entry_text", "monthly_views", "external_refs")
_YEAR_TOKEN_RE = re.compile(r"^[12]\d{3}$")


# =============================================================================
# Records
# =============================================================================

@dataclass(frozen=True)
class EventRecord:
    id: str
    name: str
    normalized_name: str
    year: int
    entry_text: str
    monthly_views: float = 0.0
    external_refs: int = 0

    @property
    def token(self) -> str:
        """Embedding token: the name with spaces joined by underscores."""
        return "_".join(self.name.split())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "name": self.name,
            "normalized_name": self.normalized_name,
            "year": self.year,
            "entry_text": self.entry_text,
            "monthly_views": self.monthly_views,
            "external_refs": self.external_refs,
        }


@dataclass
class EventLoadResult:
    events: List[EventRecord] = field(default_factory=list)
    errors: List[Tuple[int, str]] = field(default_factory=list)


def normalize_name(name: str) -> str:
    """Drop standalone year tokens (1000-2999) and collapse whitespace."""
    if not name or not name.strip():
        raise EventDataError("event name is empty")
    kept = [token for token in name.split() if not _YEAR_TOKEN_RE.match(token)]
    if not kept:
        raise EventDataError(f"event name '{name}' is only a temporal expression")
    return " ".join(kept)


def event_from_mapping(data: Mapping[str, Any]) -> EventRecord:
    """Build a record from one parsed dataset line."""
    missing = [key for key in REQUIRED_FIELDS if key not in data or data[key] is None]
    if missing:
        raise EventDataError(f"missing required field(s): {', '.join(missing)}")
    try:
        year = int(data["year"])
        views = float(data["monthly_views"])
        refs = int(data["external_refs"])
    except (TypeError, ValueError) as exc:
        raise EventDataError(f"invalid numeric field: {exc}")
    if views < 0 or refs < 0 or not math.isfinite(views):
        raise EventDataError("popularity statistics must be nonnegative")
    name = str(data["name"]).strip()
    return EventRecord(
        id=str(data["id"]),
        name=name,
        normalized_name=normalize_name(name),
        year=year,
        entry_text=str(data["entry_text"]),
        monthly_views=views,
        external_refs=refs,
    )


def read_events(path: str) -> EventLoadResult:
    """Parse a JSONL event file, collecting per-line errors instead of aborting."""
    if not os.path.exists(path):
        raise InputNotFoundError(path, "event dataset")

    result = EventLoadResult()
    seen_ids = set()
    with open(path, "rb") as handle:
        for line_no, raw in enumerate(handle, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                result.errors.append((line_no, f"not valid UTF-8 at byte {exc.start}"))
                continue
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                if not isinstance(data, dict):
                    raise EventDataError("record is not an object")
                event = event_from_mapping(data)
                if event.id in seen_ids:
                    raise EventDataError(f"duplicate event id '{event.id}'")
            except json.JSONDecodeError as exc:
                result.errors.append((line_no, f"invalid JSON: {exc.msg}"))
                continue
            except EventDataError as exc:
                result.errors.append((line_no, exc.message))
                continue
            seen_ids.add(event.id)
            result.events.append(event)

    for line_no, message in result.errors:
        logger.warning(f"{path}:{line_no}: {message}", extra={'line': line_no})
    return result


def load_events(path: str) -> List[EventRecord]:
    result = read_events(path)
    logger.info(
        f"Loaded {len(result.events)} events",
        extra={'path': path, 'rejected_lines': len(result.errors)}
    )
    return result.events


def write_events(events: Iterable[EventRecord], path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for event in events:
            data = event.to_dict()
            data.pop("normalized_name")
            handle.write(json.dumps(data, sort_keys=True) + "\n")


def filter_events(events: Sequence[EventRecord], min_views: float = MIN_VIEWS,
                  min_refs: int = MIN_REFS,
                  year_range: Tuple[int, int] = (YEAR_MIN, YEAR_MAX)) -> List[EventRecord]:
    """Keep events with views and refs strictly above the minimums inside the year range."""
    low, high = year_range
    return [
        event for event in events
        if event.monthly_views > min_views
        and event.external_refs > min_refs
        and low <= event.year <= high
        and event.entry_text.strip()
    ]


# =============================================================================
# Term statistics
# =============================================================================

@dataclass
class TfIdfModel:
    """Stem statistics over the event-entry corpus."""
    document_frequency: Dict[str, int]
    num_documents: int
    per_event_term_counts: Dict[str, Counter]
    total_tokens: Dict[str, int]
    surface_counts: Dict[str, Counter]
    surface_forms: Dict[str, str]
    analyzer: Analyzer = field(repr=False, compare=False, default_factory=default_analyzer)

    def __contains__(self, event_id: object) -> bool:
        return event_id in self.per_event_term_counts

    def stem(self, word: str) -> str:
        return self.analyzer.stem(word)

    def idf(self, stem: str) -> float:
        df = self.document_frequency.get(stem, 0)
        if df == 0:
            return 0.0
        return math.log(self.num_documents / df)

    def surface_form(self, stem: str) -> str:
        """Most frequent surface spelling of ``stem`` across the corpus."""
        return self.surface_forms.get(stem, stem)

    def counts_for(self, event: EventRecord) -> Tuple[Counter, int]:
        if event.id not in self.per_event_term_counts:
            raise EventDataError(f"event '{event.id}' is not in the TF-IDF model")
        return self.per_event_term_counts[event.id], self.total_tokens[event.id]


def build_tfidf(events: Sequence[EventRecord], analyzer: Optional[Analyzer] = None) -> TfIdfModel:
    """Document frequencies and per-event stem counts over stemmed, stopped entries."""
    if not events:
        raise EventDataError("cannot build a TF-IDF model over zero events")
    analyzer = analyzer or default_analyzer()

    df: Counter = Counter()
    per_event: Dict[str, Counter] = {}
    totals: Dict[str, int] = {}
    surfaces: Dict[str, Counter] = {}
    spellings: Dict[str, Counter] = {}

    for event in events:
        pairs = analyzer.pairs(event.entry_text)
        counts = Counter(stem for _, stem in pairs)
        per_event[event.id] = counts
        totals[event.id] = len(pairs)
        surfaces[event.id] = Counter(split_words(event.entry_text))
        df.update(counts.keys())
        for surface, stem in pairs:
            spellings.setdefault(stem, Counter())[surface] += 1

    surface_forms = {
        stem: min(counter.items(), key=lambda item: (-item[1], item[0]))[0]
        for stem, counter in spellings.items()
    }
    model = TfIdfModel(
        document_frequency=dict(df),
        num_documents=len(events),
        per_event_term_counts=per_event,
        total_tokens=totals,
        surface_counts=surfaces,
        surface_forms=surface_forms,
        analyzer=analyzer,
    )
    logger.info(
        f"Built TF-IDF model over {len(events)} event entries",
        extra={'vocabulary': len(df)}
    )
    return model


def term_frequency(w: str, e: EventRecord, model: Optional[TfIdfModel] = None) -> float:
    """Stemmed occurrences of ``w`` in the entry divided by the entry's token count."""
    if model is not None and e.id in model:
        counts, total = model.counts_for(e)
        stem = model.stem(w)
    else:
        analyzer = model.analyzer if model is not None else default_analyzer()
        stems = analyzer.tokenize(e.entry_text)
        counts, total = Counter(stems), len(stems)
        stem = analyzer.stem(w)
    if total == 0:
        raise EventDataError(f"event '{e.id}' has an empty entry")
    return counts.get(stem, 0) / total


def surface_count(w: str, e: EventRecord, model: Optional[TfIdfModel] = None) -> int:
    """Case-insensitive count of the unstemmed word in the entry."""
    word = w.lower()
    if model is not None and e.id in model.surface_counts:
        return model.surface_counts[e.id].get(word, 0)
    return sum(1 for token in split_words(e.entry_text) if token == word)


def tfidf(w: str, e: EventRecord, model: TfIdfModel) -> float:
    """tf(w, e) * ln(N / df(w)); 0 when the stem never occurs in the corpus."""
    return stem_tfidf(model.stem(w), e, model)


def stem_tfidf(stem: str, e: EventRecord, model: TfIdfModel) -> float:
    """tfidf for an already-stemmed term."""
    counts, total = model.counts_for(e)
    count = counts.get(stem, 0)
    if count == 0 or total == 0:
        return 0.0
    return (count / total) * model.idf(stem)


def top_tfidf_terms(e: EventRecord, n: int, model: TfIdfModel) -> List[Tuple[str, float]]:
    """The ``n`` best stems of the entry by tfidf, ties by stem order."""
    counts, total = model.counts_for(e)
    if n <= 0 or total == 0:
        return []
    scored = [(stem, (count / total) * model.idf(stem)) for stem, count in counts.items()]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:n]
