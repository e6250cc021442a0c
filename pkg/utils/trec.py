"""TREC topic, qrels and run file IO."""
from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

from utils.detection import Query
from utils.errors import InputNotFoundError, TrecFormatError
from utils.logger import get_logger

logger = get_logger()

Qrels = Dict[Tuple[str, str], int]
Run = Dict[str, List[Tuple[str, float]]]

_TOP_RE = re.compile(r"<top>(.*?)</top>", re.DOTALL | re.IGNORECASE)
_NUM_RE = re.compile(r"<num>\s*(?:Number:)?\s*(\S+)", re.IGNORECASE)
_TITLE_RE = re.compile(r"<title>\s*(?:Topic:)?(.*?)(?=<[a-z/]+>|\Z)", re.DOTALL | re.IGNORECASE)


@dataclass
class TopicLoadResult:
    topics: List[Tuple[str, Query]] = field(default_factory=list)
    errors: List[Tuple[int, str]] = field(default_factory=list)


def _require(path: str, what: str) -> None:
    if not os.path.exists(path):
        raise InputNotFoundError(path, what)


def read_trec_topics(path: str) -> TopicLoadResult:
    """Topics from <top> blocks, title field only; bad blocks are reported by position."""
    _require(path, "topics file")
    with open(path, encoding="utf-8") as handle:
        content = handle.read()

    result = TopicLoadResult()
    for position, match in enumerate(_TOP_RE.finditer(content), start=1):
        block = match.group(1)
        num = _NUM_RE.search(block)
        title = _TITLE_RE.search(block)
        title_text = " ".join(title.group(1).split()) if title else ""
        if not num:
            result.errors.append((position, "topic is missing <num>"))
        elif not title_text:
            result.errors.append((position, f"topic {num.group(1)} is missing <title>"))
        else:
            result.topics.append((num.group(1), Query.from_text(title_text)))

    for position, message in result.errors:
        logger.warning(f"{path}: topic #{position}: {message}")
    return result


def parse_trec_topics(path: str) -> List[Tuple[str, Query]]:
    result = read_trec_topics(path)
    logger.info(f"Parsed {len(result.topics)} topics", extra={'path': path})
    return result.topics


def write_trec_topics(topics: Sequence[Tuple[str, str]], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for qid, title in topics:
            handle.write(f"<top>\n<num> Number: {qid}\n<title> {title}\n</top>\n\n")


def parse_qrels(path: str) -> Qrels:
    """Four-column qrels (qid, iteration, docid, relevance); later duplicates win."""
    _require(path, "qrels file")
    qrels: Qrels = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 4:
                raise TrecFormatError(f"expected 4 columns, got {len(fields)}", line_no)
            qid, _iteration, doc_id, relevance = fields
            try:
                grade = int(relevance)
            except ValueError:
                raise TrecFormatError(f"non-integer relevance '{relevance}'", line_no)
            if (qid, doc_id) in qrels:
                logger.warning(
                    f"{path}:{line_no}: duplicate judgment for ({qid}, {doc_id}); keeping the last",
                    extra={'line': line_no}
                )
            qrels[(qid, doc_id)] = grade
    return qrels


def write_qrels(qrels: Mapping[Tuple[str, str], int], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for (qid, doc_id), grade in qrels.items():
            handle.write(f"{qid} 0 {doc_id} {grade}\n")


def qrels_by_query(qrels: Qrels) -> Dict[str, Dict[str, int]]:
    grouped: Dict[str, Dict[str, int]] = {}
    for (qid, doc_id), grade in qrels.items():
        grouped.setdefault(qid, {})[doc_id] = grade
    return grouped


def write_run(run: Mapping[str, Sequence[Tuple[str, float]]], path: str, tag: str = "event_qe") -> None:
    """Six-column TREC run: qid Q0 docid rank score tag."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for qid, ranking in run.items():
            for position, (doc_id, score) in enumerate(ranking, start=1):
                handle.write(f"{qid} Q0 {doc_id} {position} {score:.6f} {tag}\n")


def read_run(path: str) -> Run:
    """Parse a six-column run file; each query's documents are ordered by rank."""
    _require(path, "run file")
    rows: Dict[str, List[Tuple[int, str, float]]] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 6:
                raise TrecFormatError(f"expected 6 columns, got {len(fields)}", line_no)
            qid, _q0, doc_id, position, score, _tag = fields
            try:
                rows.setdefault(qid, []).append((int(position), doc_id, float(score)))
            except ValueError:
                raise TrecFormatError("rank must be an integer and score a number", line_no)
    return {
        qid: [(doc_id, score) for _, doc_id, score in sorted(entries, key=lambda r: (r[0], r[1]))]
        for qid, entries in rows.items()
    }
