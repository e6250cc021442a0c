"""Inverted index, interpolated query models and TF-IDF ranking."""
from __future__ import annotations

import json
import math
import os
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

from utils.config import DEPTH, INTERP_ALPHA
from utils.errors import ConfigError, CorpusError, InputNotFoundError
from utils.expansion import ExpandedQuery
from utils.logger import get_logger
from utils.text_analysis import Analyzer, default_analyzer

logger = get_logger()

Ranking = List[Tuple[str, float]]


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str


@dataclass
class RetrievalConfig:
    interp_alpha: float = INTERP_ALPHA
    depth: int = DEPTH

    def __post_init__(self) -> None:
        if not 0.0 <= self.interp_alpha <= 1.0:
            raise ConfigError(f"interp_alpha must lie in [0, 1], got {self.interp_alpha}")
        if self.depth < 1:
            raise ConfigError(f"depth must be >= 1, got {self.depth}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class InvertedIndex:
    postings: Dict[str, List[Tuple[str, int]]] = field(default_factory=dict)
    document_frequency: Dict[str, int] = field(default_factory=dict)
    doc_lengths: Dict[str, int] = field(default_factory=dict)
    analyzer: Analyzer = field(default_factory=default_analyzer, repr=False, compare=False)

    @property
    def num_docs(self) -> int:
        return len(self.doc_lengths)

    def idf(self, stem: str) -> float:
        df = self.document_frequency.get(stem, 0)
        if df == 0:
            return 0.0
        return math.log(self.num_docs / df)


# =============================================================================
# Corpus
# =============================================================================

def load_corpus(path: str) -> List[Document]:
    """A directory of text files named by doc id, or a JSONL file of {doc_id, text}."""
    if os.path.isdir(path):
        docs = []
        for name in sorted(os.listdir(path)):
            full = os.path.join(path, name)
            if not os.path.isfile(full):
                continue
            stem, ext = os.path.splitext(name)
            doc_id = stem if ext == ".txt" else name
            with open(full, encoding="utf-8") as handle:
                docs.append(Document(doc_id, handle.read()))
    elif os.path.isfile(path):
        docs = []
        with open(path, encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    data = json.loads(line)
                    docs.append(Document(str(data["doc_id"]), str(data["text"])))
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    logger.warning(f"{path}:{line_no}: malformed corpus record ({exc})",
                                   extra={'line': line_no})
    else:
        raise InputNotFoundError(path, "corpus")
    logger.info(f"Loaded {len(docs)} documents", extra={'path': path})
    return docs


def write_corpus(docs: Iterable[Document], path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for doc in docs:
            handle.write(json.dumps({"doc_id": doc.doc_id, "text": doc.text}) + "\n")


def index_corpus(docs: Iterable[Document], analyzer: Optional[Analyzer] = None) -> InvertedIndex:
    """Build postings over stemmed, stopped tokens; postings are sorted by doc id."""
    analyzer = analyzer or default_analyzer()
    postings: Dict[str, List[Tuple[str, int]]] = defaultdict(list)
    lengths: Dict[str, int] = {}

    for doc in docs:
        if doc.doc_id in lengths:
            raise CorpusError(f"duplicate doc_id '{doc.doc_id}'")
        stems = analyzer.tokenize(doc.text)
        lengths[doc.doc_id] = len(stems)
        for stem, count in Counter(stems).items():
            postings[stem].append((doc.doc_id, count))

    for plist in postings.values():
        plist.sort()
    index = InvertedIndex(
        postings=dict(postings),
        document_frequency={stem: len(plist) for stem, plist in postings.items()},
        doc_lengths=lengths,
        analyzer=analyzer,
    )
    logger.info(
        f"Indexed {index.num_docs} documents",
        extra={'vocabulary': len(index.postings)}
    )
    return index


# =============================================================================
# Query models and ranking
# =============================================================================

def maximum_likelihood(terms: List[str]) -> Dict[str, float]:
    if not terms:
        return {}
    counts = Counter(terms)
    return {term: count / len(terms) for term, count in counts.items()}


def interpolate(expanded: ExpandedQuery, config: Optional[RetrievalConfig] = None) -> Dict[str, float]:
    """alpha * P_ED + (1 - alpha) * P_ML; P_ML alone when there is no expansion."""
    config = config or RetrievalConfig()
    p_ml = maximum_likelihood(expanded.original.terms)
    p_ed = expanded.weights
    if not p_ed:
        return dict(p_ml)
    if not p_ml:
        return dict(p_ed)

    alpha = config.interp_alpha
    model: Dict[str, float] = {}
    for share, distribution in ((1.0 - alpha, p_ml), (alpha, p_ed)):
        if share <= 0.0:
            continue
        for term, weight in distribution.items():
            model[term] = model.get(term, 0.0) + share * weight
    return model


def rank(index: InvertedIndex, query_model: Mapping[str, float], depth: int = DEPTH) -> Ranking:
    """score(d) = sum_w P(w|q) * tf_d(w) / len(d) * ln(N / df(w)), best first, ties by doc id."""
    stem_weights: Dict[str, float] = defaultdict(float)
    for term, weight in sorted(query_model.items()):
        stems = index.analyzer.tokenize(term)
        for stem in stems:
            stem_weights[stem] += weight / len(stems)

    scores: Dict[str, float] = {}
    for stem in sorted(stem_weights):
        plist = index.postings.get(stem)
        if not plist:
            continue
        idf = index.idf(stem)
        weight = stem_weights[stem]
        for doc_id, count in plist:
            tf = count / index.doc_lengths[doc_id]
            scores[doc_id] = scores.get(doc_id, 0.0) + weight * tf * idf

    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:depth]
