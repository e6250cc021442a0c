"""Deterministic desk-scale benchmark: models, events, corpus, topics and qrels.

Each topic has two query words, one event whose entry is rich in a topic
vocabulary, relevant documents written mostly in that vocabulary and
distractor documents that repeat the query words but are not relevant.
Words are pronounceable consonant-vowel strings that the Porter stemmer
leaves unchanged.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Set, Tuple

import numpy as np

from utils.config import DEFAULT_SEED
from utils.eventstore import EventRecord, normalize_name, write_events
from utils.logger import get_logger
from utils.pipeline import PipelineConfig, PipelinePaths, save_pipeline_config
from utils.retrieval import Document, write_corpus
from utils.text_analysis import default_analyzer
from utils.trec import write_qrels, write_trec_topics
from utils.vecspace import EmbeddingModel, TemporalModelSet, save_model, save_temporal_models

logger = get_logger()

_CONSONANTS = "bdfgklmnprtvz"
_VOWELS = "aiou"
_FINALS = "kmnpt"


@dataclass
class BenchmarkSettings:
    n_topics: int = 10
    dim: int = 16
    query_words: int = 2
    event_words: int = 12
    entry_fillers: int = 40
    relevant_docs: int = 10
    distractor_docs: int = 5
    background_docs: int = 50
    doc_length: int = 20
    filler_vocabulary: int = 300
    entry_filler_vocabulary: int = 60
    extra_events: int = 5
    first_year: int = 1985
    year_step: int = 2
    word_noise: float = 0.3
    event_noise: float = 0.1
    temporal_noise: float = 0.03
    temporal_drop_rate: float = 0.05


@dataclass
class Benchmark:
    static: EmbeddingModel
    temporal: TemporalModelSet
    events: List[EventRecord]
    documents: List[Document]
    topics: List[Tuple[str, str]]
    qrels: Dict[Tuple[str, str], int] = field(default_factory=dict)


def _pseudo_words(rng: np.random.Generator, count: int, taken: Set[str]) -> List[str]:
    stop_words = default_analyzer().stop_words
    words: List[str] = []
    while len(words) < count:
        letters = [
            _CONSONANTS[rng.integers(len(_CONSONANTS))],
            _VOWELS[rng.integers(len(_VOWELS))],
            _CONSONANTS[rng.integers(len(_CONSONANTS))],
            _VOWELS[rng.integers(len(_VOWELS))],
            _FINALS[rng.integers(len(_FINALS))],
        ]
        word = "".join(letters)
        if word in taken or word in stop_words:
            continue
        taken.add(word)
        words.append(word)
    return words


def _unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    vec = rng.standard_normal(dim)
    return vec / np.linalg.norm(vec)


def _near(rng: np.random.Generator, center: np.ndarray, sigma: float) -> np.ndarray:
    return center + sigma * rng.standard_normal(center.shape[0]) / np.sqrt(center.shape[0])


def _rotation(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def _entry_text(rng: np.random.Generator, words: Sequence[str]) -> str:
    words = list(words)
    rng.shuffle(words)
    sentences = [" ".join(words[i:i + 12]) for i in range(0, len(words), 12)]
    return ". ".join(s.capitalize() for s in sentences) + "."


def build_benchmark(seed: int = DEFAULT_SEED, settings: BenchmarkSettings = None) -> Benchmark:
    s = settings or BenchmarkSettings()
    rng = np.random.default_rng(seed)
    taken: Set[str] = set()

    query_words = [_pseudo_words(rng, s.query_words, taken) for _ in range(s.n_topics)]
    topic_words = [_pseudo_words(rng, s.event_words, taken) for _ in range(s.n_topics)]
    fillers = _pseudo_words(rng, s.filler_vocabulary, taken)
    entry_fillers = _pseudo_words(rng, s.entry_filler_vocabulary, taken)
    name_words = _pseudo_words(rng, 2 * (s.n_topics + s.extra_events), taken)

    # -- static model -----------------------------------------------------------
    tokens: List[str] = []
    vectors: List[np.ndarray] = []
    centers = [_unit(rng, s.dim) for _ in range(s.n_topics)]
    for i in range(s.n_topics):
        for word in query_words[i] + topic_words[i]:
            tokens.append(word)
            vectors.append(_near(rng, centers[i], s.word_noise))
    for word in fillers + entry_fillers:
        tokens.append(word)
        vectors.append(_unit(rng, s.dim))
    word_count = len(tokens)

    # -- events -------------------------------------------------------------------
    topic_years = [s.first_year + i * s.year_step for i in range(s.n_topics)]
    events: List[EventRecord] = []
    event_vectors: List[np.ndarray] = []
    for i in range(s.n_topics + s.extra_events):
        first, second = name_words[2 * i].capitalize(), name_words[2 * i + 1].capitalize()
        if i < s.n_topics:
            year = topic_years[i]
            words = [w for w in query_words[i] for _ in range(3)]
            words += [w for w in topic_words[i] for _ in range(2)]
            vector = _near(rng, centers[i], s.event_noise)
        else:
            year = int(rng.choice(topic_years))
            words = list(rng.choice(fillers, size=10))
            vector = _unit(rng, s.dim)
        words += list(rng.choice(entry_fillers, size=s.entry_fillers))
        name = f"{year} {first} {second} crisis"
        events.append(EventRecord(
            id=f"E{i + 1:03d}",
            name=name,
            normalized_name=normalize_name(name),
            year=year,
            entry_text=_entry_text(rng, words),
            monthly_views=float(rng.integers(6000, 60000)),
            external_refs=int(rng.integers(16, 120)),
        ))
        event_vectors.append(vector)

    # records the dataset filters reject
    for offset, (year, views) in enumerate([(topic_years[0], 5000.0), (1979, 9000.0)], start=1):
        name = f"{year} Filtered event {offset}"
        events.append(EventRecord(
            id=f"E{900 + offset}", name=name, normalized_name=normalize_name(name), year=year,
            entry_text=_entry_text(rng, list(rng.choice(entry_fillers, size=20))),
            monthly_views=views, external_refs=40,
        ))

    static_tokens = tokens + [e.token for e in events[:len(event_vectors)]]
    static = EmbeddingModel("static", s.dim, static_tokens, np.vstack(vectors + event_vectors))

    # -- temporal models: rotated copies of the word vectors ----------------------
    word_matrix = np.vstack(vectors)
    filler_set = set(fillers)
    temporal: Dict[int, EmbeddingModel] = {}
    for year in range(min(topic_years) - 1, max(topic_years) + 1):
        rotated = word_matrix @ _rotation(rng, s.dim).T
        rotated = rotated + s.temporal_noise * rng.standard_normal(rotated.shape) / np.sqrt(s.dim)
        keep = [i for i, token in enumerate(tokens[:word_count])
                if token not in filler_set or rng.random() >= s.temporal_drop_rate]
        temporal[year] = EmbeddingModel(str(year), s.dim, [tokens[i] for i in keep], rotated[keep])

    # -- corpus ---------------------------------------------------------------------
    drafts: List[Tuple[List[str], int, str]] = []  # (words, topic, kind)
    for i in range(s.n_topics):
        for _ in range(s.relevant_docs):
            n_topic = int(rng.integers(10, 15))
            words = list(rng.choice(topic_words[i], size=n_topic))
            if rng.random() < 0.3:
                words.append(str(rng.choice(query_words[i])))
            words += list(rng.choice(fillers, size=s.doc_length - len(words)))
            drafts.append((words, i, "relevant"))
        for _ in range(s.distractor_docs):
            words = list(query_words[i]) + [str(rng.choice(query_words[i]))]
            words += list(rng.choice(fillers, size=s.doc_length - len(words)))
            drafts.append((words, i, "distractor"))
    for _ in range(s.background_docs):
        drafts.append((list(rng.choice(fillers, size=s.doc_length)), -1, "background"))

    order = rng.permutation(len(drafts))
    documents: List[Document] = []
    qrels: Dict[Tuple[str, str], int] = {}
    topics = [(str(401 + i), " ".join(query_words[i])) for i in range(s.n_topics)]
    background_ids: List[str] = []
    for position, draft_index in enumerate(order, start=1):
        words, topic, kind = drafts[draft_index]
        doc_id = f"D{position:04d}"
        words = [str(w) for w in words]
        rng.shuffle(words)
        documents.append(Document(doc_id, " ".join(words)))
        if kind == "relevant":
            qrels[(topics[topic][0], doc_id)] = 1
        elif kind == "distractor":
            qrels[(topics[topic][0], doc_id)] = 0
        else:
            background_ids.append(doc_id)
    for qid, _title in topics:
        for doc_id in rng.choice(background_ids, size=3, replace=False):
            qrels[(qid, str(doc_id))] = 0
    qrels = dict(sorted(qrels.items(), key=lambda item: (int(item[0][0]), item[0][1])))

    return Benchmark(
        static=static,
        temporal=TemporalModelSet(temporal),
        events=events,
        documents=documents,
        topics=topics,
        qrels=qrels,
    )


def generate_benchmark(out_dir: str, seed: int = DEFAULT_SEED,
                       settings: BenchmarkSettings = None) -> Dict[str, str]:
    """Write the benchmark plus a ready-to-use config.json under ``out_dir``."""
    bench = build_benchmark(seed, settings)
    os.makedirs(out_dir, exist_ok=True)

    paths = {
        "static_model": os.path.join(out_dir, "static.txt"),
        "temporal_dir": os.path.join(out_dir, "temporal"),
        "events": os.path.join(out_dir, "events.jsonl"),
        "corpus": os.path.join(out_dir, "corpus.jsonl"),
        "topics": os.path.join(out_dir, "topics.txt"),
        "qrels": os.path.join(out_dir, "qrels.txt"),
        "config": os.path.join(out_dir, "config.json"),
    }
    save_model(bench.static, paths["static_model"])
    save_temporal_models(bench.temporal, paths["temporal_dir"])
    write_events(bench.events, paths["events"])
    write_corpus(bench.documents, paths["corpus"])
    write_trec_topics(bench.topics, paths["topics"])
    write_qrels(bench.qrels, paths["qrels"])

    config = PipelineConfig(
        paths=PipelinePaths(
            static_model="static.txt",
            temporal_dir="temporal",
            enriched_dir="enriched",
            events="events.jsonl",
            corpus="corpus.jsonl",
            topics="topics.txt",
            qrels="qrels.txt",
            output_dir="out",
        ),
        seed=seed,
    )
    save_pipeline_config(config, paths["config"])
    logger.info(
        f"Generated benchmark in {out_dir}",
        extra={'seed': seed, 'documents': len(bench.documents), 'topics': len(bench.topics),
               'events': len(bench.events), 'years': len(bench.temporal)}
    )
    return paths
