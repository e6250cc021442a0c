"""Dense embedding models: loading, saving, cosine primitives and exact kNN.

One static model (words plus event tokens) and one temporal model per year.
Vectors are held as float64 rows of a single matrix regardless of the
precision of the file they came from.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
from gensim.models import KeyedVectors

from utils.config import MODEL_PRECISION, YEAR_MAX, YEAR_MIN
from utils.errors import (
    DimensionMismatchError,
    InputNotFoundError,
    ModelFormatError,
    OutOfVocabularyError,
    ZeroNormError,
)
from utils.logger import get_logger

logger = get_logger()

STATIC_LABEL = "static"
_YEAR_FILE_RE = re.compile(r"^(\d{4})\.txt$")

TokenFilter = Callable[[str], bool]
QueryLike = Union[str, Sequence[float], np.ndarray]


# =============================================================================
# Embedding model
# =============================================================================

class EmbeddingModel:
    """A vocabulary of tokens mapped to rows of a float64 matrix.

    Lookups try the exact token first and then a case-folded index in which
    the first-loaded spelling of a folded key wins.
    """

    def __init__(self, label: str, dim: int,
                 tokens: Sequence[str] = (),
                 vectors: Optional[np.ndarray] = None):
        if dim <= 0:
            raise ModelFormatError(f"dimension must be positive, got {dim}")
        self.label = str(label)
        self.dim = int(dim)
        self.tokens: List[str] = []
        self._index: Dict[str, int] = {}
        self._folded: Dict[str, int] = {}
        self._matrix = np.zeros((0, self.dim), dtype=np.float64)
        self._pending: List[np.ndarray] = []
        self._unit: Optional[np.ndarray] = None
        self._token_rank: Optional[np.ndarray] = None
        self.projected: Set[str] = set()

        if vectors is not None:
            matrix = np.asarray(vectors, dtype=np.float64)
            if matrix.ndim != 2 or matrix.shape[0] != len(tokens):
                raise ModelFormatError(
                    f"expected a {len(tokens)}x{self.dim} matrix, got shape {matrix.shape}"
                )
            if matrix.shape[1] != self.dim:
                raise DimensionMismatchError(self.dim, matrix.shape[1], "vector matrix")
            for i, token in enumerate(tokens):
                self._register(token, i)
            self._matrix = matrix.copy()
        elif tokens:
            raise ModelFormatError("tokens given without vectors")

    # -- internal bookkeeping -------------------------------------------------

    def _register(self, token: str, row: int) -> None:
        if not token or any(ch.isspace() for ch in token):
            raise ModelFormatError(f"invalid token {token!r}")
        if token in self._index:
            raise ModelFormatError(f"duplicate token '{token}'")
        self._index[token] = row
        self._folded.setdefault(token.lower(), row)
        self.tokens.append(token)

    def _flush(self) -> None:
        if self._pending:
            self._matrix = np.vstack([self._matrix] + self._pending)
            self._pending = []

    def _invalidate(self) -> None:
        self._unit = None
        self._token_rank = None

    # -- read access ------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: object) -> bool:
        return isinstance(token, str) and self.resolve(token) is not None

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)

    def __repr__(self) -> str:
        return f"EmbeddingModel(label={self.label!r}, dim={self.dim}, size={len(self)})"

    def resolve(self, token: str) -> Optional[str]:
        """Return the stored spelling of ``token`` or None when absent."""
        if token in self._index:
            return token
        row = self._folded.get(token.lower())
        return None if row is None else self.tokens[row]

    def row_of(self, token: str) -> int:
        resolved = self.resolve(token)
        if resolved is None:
            raise OutOfVocabularyError(token, self.label)
        return self._index[resolved]

    @property
    def matrix(self) -> np.ndarray:
        self._flush()
        return self._matrix

    @property
    def unit_matrix(self) -> np.ndarray:
        """Row-normalized matrix; zero-norm rows stay zero."""
        if self._unit is None:
            matrix = self.matrix
            norms = np.linalg.norm(matrix, axis=1)
            safe = np.where(norms > 0, norms, 1.0)
            self._unit = matrix / safe[:, None]
        return self._unit

    @property
    def token_rank(self) -> np.ndarray:
        """Lexicographic rank of each row's token."""
        if self._token_rank is None:
            order = np.argsort(np.array(self.tokens, dtype=str), kind="stable")
            rank = np.empty(len(order), dtype=np.int64)
            rank[order] = np.arange(len(order))
            self._token_rank = rank
        return self._token_rank

    def vector(self, token: str) -> np.ndarray:
        return self.matrix[self.row_of(token)]

    def get(self, token: str) -> Optional[np.ndarray]:
        resolved = self.resolve(token)
        return None if resolved is None else self.matrix[self._index[resolved]]

    # -- mutation ---------------------------------------------------------------

    def add(self, token: str, vector: Sequence[float], projected: bool = False) -> bool:
        """Insert or overwrite ``token``. Returns True when it replaced an entry."""
        vec = np.asarray(vector, dtype=np.float64).reshape(-1)
        if vec.shape[0] != self.dim:
            raise DimensionMismatchError(self.dim, vec.shape[0], f"vector for '{token}'")
        if not np.all(np.isfinite(vec)):
            raise ModelFormatError(f"non-finite value in vector for '{token}'")

        replaced = token in self._index
        if replaced:
            self._flush()
            self._matrix[self._index[token]] = vec
        else:
            self._register(token, len(self.tokens))
            self._pending.append(vec[None, :])
        if projected:
            self.projected.add(token)
        self._invalidate()
        return replaced

    def copy(self, label: Optional[str] = None) -> "EmbeddingModel":
        clone = EmbeddingModel(label if label is not None else self.label, self.dim,
                               list(self.tokens), self.matrix)
        clone.projected = set(self.projected)
        return clone


# =============================================================================
# Cosine primitives
# =============================================================================

def _as_vector(value: Sequence[float], context: str) -> np.ndarray:
    vec = np.asarray(value, dtype=np.float64).reshape(-1)
    if vec.size == 0:
        raise ZeroNormError(context)
    return vec


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    """Cosine similarity clamped to [-1, 1]."""
    va = _as_vector(a, "first vector")
    vb = _as_vector(b, "second vector")
    if va.shape[0] != vb.shape[0]:
        raise DimensionMismatchError(va.shape[0], vb.shape[0], "second vector")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0:
        raise ZeroNormError("first vector")
    if nb == 0.0:
        raise ZeroNormError("second vector")
    value = float(np.dot(va, vb)) / (na * nb)
    return max(-1.0, min(1.0, value))


def cosine_distance(a: Sequence[float], b: Sequence[float]) -> float:
    return 1.0 - cosine(a, b)


def similarity(model: EmbeddingModel, t1: str, t2: str) -> float:
    """Cosine of two tokens' vectors in ``model``; raises OutOfVocabularyError."""
    return cosine(model.vector(t1), model.vector(t2))


def knn(model: EmbeddingModel, query: QueryLike, k: int,
        token_filter: Optional[TokenFilter] = None) -> List[Tuple[str, float]]:
    """Exact nearest neighbors by cosine, ties broken by token order.

    A token query is excluded from its own result. Zero-norm rows score 0.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")

    exclude: Optional[str] = None
    if isinstance(query, str):
        exclude = model.resolve(query)
        if exclude is None:
            raise OutOfVocabularyError(query, model.label)
        qvec = model.vector(exclude)
    else:
        qvec = _as_vector(query, "query vector")
        if qvec.shape[0] != model.dim:
            raise DimensionMismatchError(model.dim, qvec.shape[0], "query vector")

    if len(model) == 0:
        return []
    qnorm = float(np.linalg.norm(qvec))
    if qnorm == 0.0:
        raise ZeroNormError("query vector")

    sims = np.clip(model.unit_matrix @ (qvec / qnorm), -1.0, 1.0)
    order = np.lexsort((model.token_rank, -sims))

    result: List[Tuple[str, float]] = []
    for row in order:
        token = model.tokens[row]
        if token == exclude:
            continue
        if token_filter is not None and not token_filter(token):
            continue
        result.append((token, float(sims[row])))
        if len(result) >= k:
            break
    return result


# =============================================================================
# Text format IO
# =============================================================================

def _read_header(path: str) -> Tuple[int, int]:
    """The "<count> <dim>" line, checked before the rows are handed to gensim."""
    try:
        with open(path, "rb") as handle:
            header = handle.readline().decode("utf-8")
    except UnicodeDecodeError:
        raise ModelFormatError("header is not valid UTF-8", path, 1)
    parts = header.split()
    if len(parts) != 2:
        raise ModelFormatError("header must be '<count> <dim>'", path, 1)
    try:
        count, dim = int(parts[0]), int(parts[1])
    except ValueError:
        raise ModelFormatError(f"non-integer header {header.strip()!r}", path, 1)
    if count < 0 or dim <= 0:
        raise ModelFormatError(f"invalid header {header.strip()!r}", path, 1)
    return count, dim


def load_model(path: str, expected_dim: Optional[int] = None,
               label: Optional[str] = None) -> EmbeddingModel:
    """Load a word2vec text file into an EmbeddingModel.

    gensim reads the rows; duplicates (which gensim drops), non-finite values
    and short files are rejected here.
    """
    if not os.path.exists(path):
        raise InputNotFoundError(path, "embedding model")
    if label is None:
        label = os.path.splitext(os.path.basename(path))[0]

    count, dim = _read_header(path)
    if expected_dim is not None and dim != expected_dim:
        raise DimensionMismatchError(expected_dim, dim, f"model {path}")

    try:
        kv = KeyedVectors.load_word2vec_format(path, binary=False, datatype=np.float64)
    except UnicodeDecodeError as exc:
        raise ModelFormatError(f"not valid UTF-8 at byte {exc.start}", path)
    except EOFError:
        raise ModelFormatError(f"header declares {count} entries, the file has fewer", path)
    except ValueError as exc:
        raise ModelFormatError(f"malformed row ({exc})", path)

    distinct = len(kv.key_to_index)
    if distinct != count:
        raise ModelFormatError(
            f"duplicate token: header declares {count} entries, {distinct} are distinct", path
        )
    matrix = np.asarray(kv.vectors, dtype=np.float64).reshape(count, dim)
    if not np.all(np.isfinite(matrix)):
        bad = kv.index_to_key[int(np.argwhere(~np.isfinite(matrix))[0][0])]
        raise ModelFormatError(f"non-finite value for token '{bad}'", path)

    model = EmbeddingModel(label, dim, list(kv.index_to_key), matrix)
    logger.info(
        f"Loaded embedding model '{label}'",
        extra={'path': path, 'entries': len(model), 'dim': dim}
    )
    return model


def format_vector(vector: Iterable[float], precision: int = MODEL_PRECISION) -> str:
    return " ".join(f"{float(v):.{precision}f}" for v in vector)


def save_model(model: EmbeddingModel, path: str, precision: int = MODEL_PRECISION) -> None:
    """Write ``model`` in the text format at a fixed decimal precision."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    matrix = model.matrix
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"{len(model)} {model.dim}\n")
        for row, token in enumerate(model.tokens):
            handle.write(f"{token} {format_vector(matrix[row], precision)}\n")
    logger.debug(
        f"Saved embedding model '{model.label}'",
        extra={'path': path, 'entries': len(model), 'precision': precision}
    )


# =============================================================================
# Temporal model set
# =============================================================================

@dataclass
class TemporalModelSet:
    """Per-year models keyed by year; each model's label is its year."""
    models: Dict[int, EmbeddingModel] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for year, model in self.models.items():
            if model.label != str(year):
                raise ModelFormatError(f"model for {year} is labelled '{model.label}'")

    def __contains__(self, year: object) -> bool:
        return year in self.models

    def __len__(self) -> int:
        return len(self.models)

    @property
    def years(self) -> List[int]:
        return sorted(self.models)

    def get(self, year: int) -> Optional[EmbeddingModel]:
        return self.models.get(year)

    @classmethod
    def aliased(cls, model: EmbeddingModel, years: Iterable[int]) -> "TemporalModelSet":
        """Every year gets its own copy of ``model`` (used for variant checks)."""
        return cls({year: model.copy(label=str(year)) for year in sorted(set(years))})


def load_temporal_models(directory: str, year_range: Tuple[int, int] = (YEAR_MIN, YEAR_MAX),
                         expected_dim: Optional[int] = None) -> TemporalModelSet:
    """Load every ``<year>.txt`` in ``directory`` whose year lies in ``year_range``."""
    if not os.path.isdir(directory):
        raise InputNotFoundError(directory, "temporal model directory")

    low, high = year_range
    models: Dict[int, EmbeddingModel] = {}
    for name in sorted(os.listdir(directory)):
        match = _YEAR_FILE_RE.match(name)
        if not match:
            continue
        year = int(match.group(1))
        if not low <= year <= high:
            logger.warning(
                f"Ignoring model outside the corpus range: {name}",
                extra={'year': year, 'range': [low, high]}
            )
            continue
        models[year] = load_model(os.path.join(directory, name), expected_dim, label=str(year))

    if not models:
        logger.warning(f"No temporal models found in {directory}")
    else:
        logger.info(
            f"Loaded {len(models)} temporal models",
            extra={'first_year': min(models), 'last_year': max(models)}
        )
    return TemporalModelSet(models)


def save_temporal_models(temporal: TemporalModelSet, directory: str,
                         precision: int = MODEL_PRECISION) -> List[str]:
    paths = []
    for year in temporal.years:
        path = os.path.join(directory, f"{year}.txt")
        save_model(temporal.models[year], path, precision)
        paths.append(path)
    return paths


@dataclass
class ModelBundle:
    """The static model together with the per-year models."""
    static: EmbeddingModel
    temporal: TemporalModelSet = field(default_factory=TemporalModelSet)

    def model_for_year(self, year: int, fallback: bool = True) -> Optional[EmbeddingModel]:
        model = self.temporal.get(year)
        if model is None and fallback:
            logger.warning(
                f"No temporal model for {year}; using the static model",
                extra={'year': year}
            )
            return self.static
        return model
