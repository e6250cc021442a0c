"""Event projection into temporal embedding models by cosine-distance matching.

An event that only exists in the static model gets a vector in a year model
by choosing the point whose cosine distances to shared anchor words best
reproduce the static-model distances (mean squared error, L-BFGS).
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Collection, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize as scipy_minimize

from utils.config import (
    DEFAULT_SEED,
    GRADIENT_TOLERANCE,
    K_ANCHORS,
    MAX_ITERATIONS,
    MIN_ANCHORS,
)
from utils.errors import ConfigError, OutOfVocabularyError, ZeroAnchorError, ZeroNormError
from utils.eventstore import EventRecord
from utils.logger import get_logger
from utils.vecspace import EmbeddingModel, TemporalModelSet, knn

logger = get_logger()

# Centroid norms below this fall back to a seeded random start
_DEGENERATE_CENTROID = 1e-8
# Unit anchors closer than this count as the same point
_COINCIDENT_ANCHORS = 1e-9


# =============================================================================
# Types
# =============================================================================

class Initialization(str, Enum):
    ANCHOR_CENTROID = "anchor-centroid"
    RANDOM_SEEDED = "random-seeded"


class ProjectionStatus(str, Enum):
    PROJECTED = "projected"
    SKIPPED = "skipped"


@dataclass
class AnchorSet:
    """Anchor words for one event with their static-model cosine distances."""
    source_event: str
    k_requested: int
    anchors: List[Tuple[str, float]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.anchors)

    @property
    def tokens(self) -> List[str]:
        return [token for token, _ in self.anchors]

    @property
    def distances(self) -> np.ndarray:
        return np.array([d for _, d in self.anchors], dtype=np.float64)


@dataclass
class ProjectionConfig:
    k_anchors: int = K_ANCHORS
    max_iterations: int = MAX_ITERATIONS
    gradient_tolerance: float = GRADIENT_TOLERANCE
    initialization: Initialization = Initialization.ANCHOR_CENTROID
    restarts: int = 0
    seed: int = DEFAULT_SEED
    min_anchors: int = MIN_ANCHORS

    def __post_init__(self) -> None:
        self.initialization = Initialization(self.initialization)
        if self.k_anchors < 2:
            raise ConfigError(f"k_anchors must be >= 2, got {self.k_anchors}")
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.gradient_tolerance <= 0:
            raise ConfigError(f"gradient_tolerance must be positive, got {self.gradient_tolerance}")
        if self.restarts < 0:
            raise ConfigError(f"restarts must be >= 0, got {self.restarts}")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["initialization"] = self.initialization.value
        return data


@dataclass
class ProjectionResult:
    vector: np.ndarray
    objective: float
    anchor_count: int
    converged: bool
    iterations: int
    gradient_norm: float
    low_anchor_count: bool = False
    ill_conditioned: bool = False


@dataclass
class ProjectionRecord:
    """One line of the projection report."""
    event: str
    name: str
    year: int
    status: ProjectionStatus
    anchor_count: int = 0
    objective: Optional[float] = None
    converged: Optional[bool] = None
    low_anchor_count: bool = False
    ill_conditioned: bool = False
    name_in_vocabulary: Optional[bool] = None
    reason: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["status"] = self.status.value
        return data


@dataclass
class ProjectionReport:
    records: List[ProjectionRecord] = field(default_factory=list)

    @property
    def projected(self) -> List[ProjectionRecord]:
        return [r for r in self.records if r.status == ProjectionStatus.PROJECTED]

    @property
    def skipped(self) -> List[ProjectionRecord]:
        return [r for r in self.records if r.status == ProjectionStatus.SKIPPED]

    def summary(self) -> Dict[str, Any]:
        return {
            "projected": len(self.projected),
            "skipped": len(self.skipped),
            "low_anchor_count": sum(1 for r in self.records if r.low_anchor_count),
            "ill_conditioned": sum(1 for r in self.records if r.ill_conditioned),
            "names_in_vocabulary": sum(1 for r in self.records if r.name_in_vocabulary),
        }

    def write_jsonl(self, path: str) -> None:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            for record in self.records:
                handle.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")


# =============================================================================
# Anchors and objective
# =============================================================================

def select_anchors(event: str, static_model: EmbeddingModel, target_model: EmbeddingModel,
                   k: int, exclude: Collection[str] = ()) -> AnchorSet:
    """Nearest static neighbors of ``event`` that the target model also knows."""
    if event not in static_model:
        raise OutOfVocabularyError(event, static_model.label)
    if len(target_model) == 0:
        raise ZeroAnchorError(event, target_model.label)

    def shared(token: str) -> bool:
        if token in exclude:
            return False
        resolved = target_model.resolve(token)
        return resolved is not None and resolved not in target_model.projected

    neighbors = knn(static_model, event, k, token_filter=shared)
    if not neighbors:
        raise ZeroAnchorError(event, target_model.label)
    anchors = [(token, 1.0 - sim) for token, sim in neighbors]
    return AnchorSet(source_event=event, k_requested=k, anchors=anchors)


def _anchor_geometry(anchor_set: AnchorSet, target_model: EmbeddingModel) -> Tuple[np.ndarray, np.ndarray]:
    """Unit target-model anchor vectors (n x dim) and their target distances."""
    rows = [target_model.row_of(token) for token in anchor_set.tokens]
    return target_model.unit_matrix[rows], anchor_set.distances


def _objective_and_gradient(v: np.ndarray, units: np.ndarray,
                            distances: np.ndarray) -> Tuple[float, np.ndarray]:
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ZeroNormError("projection vector")
    u = v / norm
    cosines = units @ u
    # residual of target distance against 1 - cos
    residual = distances - 1.0 + cosines
    n = len(distances)
    value = float(np.dot(residual, residual)) / n
    gradient = (2.0 / n) * (units.T @ residual - float(np.dot(residual, cosines)) * u) / norm
    return value, gradient


def objective(v: Sequence[float], anchor_set: AnchorSet, target_model: EmbeddingModel) -> float:
    """Mean squared difference between target distances and cosine distances to v."""
    units, distances = _anchor_geometry(anchor_set, target_model)
    return _objective_and_gradient(np.asarray(v, dtype=np.float64), units, distances)[0]


def objective_gradient(v: Sequence[float], anchor_set: AnchorSet,
                       target_model: EmbeddingModel) -> np.ndarray:
    units, distances = _anchor_geometry(anchor_set, target_model)
    return _objective_and_gradient(np.asarray(v, dtype=np.float64), units, distances)[1]


# =============================================================================
# Optimizer
# =============================================================================

def _random_unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    start = rng.standard_normal(dim)
    return start / np.linalg.norm(start)


def _starting_points(units: np.ndarray, config: ProjectionConfig) -> List[np.ndarray]:
    rng = np.random.default_rng(config.seed)
    dim = units.shape[1]
    starts: List[np.ndarray] = []
    if config.initialization == Initialization.ANCHOR_CENTROID:
        centroid = units.mean(axis=0)
        norm = float(np.linalg.norm(centroid))
        if norm >= _DEGENERATE_CENTROID:
            starts.append(centroid / norm)
        else:
            logger.debug("Anchor centroid is degenerate; starting from a seeded random point")
    if not starts:
        starts.append(_random_unit(rng, dim))
    for _ in range(config.restarts):
        starts.append(_random_unit(rng, dim))
    return starts


def minimize(anchor_set: AnchorSet, target_model: EmbeddingModel,
             config: Optional[ProjectionConfig] = None) -> ProjectionResult:
    """L-BFGS minimization of the objective; the best start wins, result is unit norm.

    Hitting the iteration cap is not an error: the best iterate comes back with
    ``converged`` False.
    """
    config = config or ProjectionConfig()
    if len(anchor_set) == 0:
        raise ZeroAnchorError(anchor_set.source_event, target_model.label)

    units, distances = _anchor_geometry(anchor_set, target_model)
    dim = units.shape[1]

    def fun(v: np.ndarray) -> Tuple[float, np.ndarray]:
        return _objective_and_gradient(v, units, distances)

    best_x: Optional[np.ndarray] = None
    best_value = np.inf
    iterations = 0
    for start in _starting_points(units, config):
        result = scipy_minimize(
            fun, start, jac=True, method="L-BFGS-B",
            options={
                "maxiter": config.max_iterations,
                # per-component tolerance so the euclidean norm meets the target
                "gtol": config.gradient_tolerance / np.sqrt(dim),
                "ftol": 1e-16,
            },
        )
        if result.fun < best_value:
            best_x, best_value, iterations = result.x, float(result.fun), int(result.nit)

    vector = best_x / np.linalg.norm(best_x)
    value, gradient = fun(vector)
    gradient_norm = float(np.linalg.norm(gradient))

    ill_conditioned = bool(len(units) >= 2 and np.max(np.abs(units - units[0])) <= _COINCIDENT_ANCHORS)
    return ProjectionResult(
        vector=vector,
        objective=value,
        anchor_count=len(anchor_set),
        converged=gradient_norm <= config.gradient_tolerance,
        iterations=iterations,
        gradient_norm=gradient_norm,
        low_anchor_count=len(anchor_set) < config.min_anchors,
        ill_conditioned=ill_conditioned,
    )


# =============================================================================
# Event-level projection
# =============================================================================

def run_projection(event: str, static_model: EmbeddingModel, target_model: EmbeddingModel,
                   config: Optional[ProjectionConfig] = None,
                   exclude: Collection[str] = ()) -> ProjectionResult:
    """select_anchors followed by minimize, without touching the target model."""
    config = config or ProjectionConfig()
    anchor_set = select_anchors(event, static_model, target_model, config.k_anchors, exclude)
    return minimize(anchor_set, target_model, config)


def project_event(event: str, static_model: EmbeddingModel, target_model: EmbeddingModel,
                  config: Optional[ProjectionConfig] = None,
                  exclude: Collection[str] = ()) -> np.ndarray:
    """Project ``event`` into ``target_model``, inserting (or overwriting) its vector."""
    result = run_projection(event, static_model, target_model, config, exclude)
    _insert(event, result, target_model)
    return result.vector


def _insert(event: str, result: ProjectionResult, target_model: EmbeddingModel) -> None:
    replaced = target_model.add(event, result.vector, projected=True)
    if replaced:
        logger.info(
            f"Overwrote existing vector for '{event}' in model {target_model.label}",
            extra={'event': event, 'model': target_model.label}
        )
    if result.low_anchor_count:
        logger.warning(
            f"Low anchor count for '{event}' in model {target_model.label}",
            extra={'event': event, 'anchor_count': result.anchor_count}
        )
    if result.ill_conditioned:
        logger.warning(
            f"Ill-conditioned anchors for '{event}' in model {target_model.label}",
            extra={'event': event, 'anchor_count': result.anchor_count}
        )


def project_all(events: Sequence[EventRecord], static_model: EmbeddingModel,
                temporal_set: TemporalModelSet,
                config: Optional[ProjectionConfig] = None) -> ProjectionReport:
    """Project every event into the model of its own year; failures are recorded, not raised."""
    config = config or ProjectionConfig()
    event_tokens = {event.token for event in events}
    report = ProjectionReport()

    for event in events:
        record = ProjectionRecord(event=event.token, name=event.name, year=event.year,
                                  status=ProjectionStatus.SKIPPED)
        report.records.append(record)

        target = temporal_set.get(event.year)
        if target is None:
            record.reason = "no model for year"
            logger.warning(f"Skipping '{event.name}': no model for year {event.year}")
            continue
        record.name_in_vocabulary = target.resolve(event.normalized_name.replace(" ", "_")) is not None
        if event.token not in static_model:
            record.reason = "event not in static model"
            logger.warning(f"Skipping '{event.name}': not in the static model")
            continue

        try:
            result = run_projection(event.token, static_model, target, config, exclude=event_tokens)
        except ZeroAnchorError:
            record.reason = "no shared anchors"
            logger.warning(
                f"Skipping '{event.name}': no anchors shared with {event.year}",
                extra={'event': event.token, 'year': event.year}
            )
            continue

        _insert(event.token, result, target)
        record.status = ProjectionStatus.PROJECTED
        record.anchor_count = result.anchor_count
        record.objective = result.objective
        record.converged = result.converged
        record.low_anchor_count = result.low_anchor_count
        record.ill_conditioned = result.ill_conditioned
        logger.debug(
            f"Projected '{event.token}' into {event.year}",
            extra={'anchors': result.anchor_count, 'objective': result.objective,
                   'converged': result.converged}
        )

    summary = report.summary()
    logger.info(f"Projection finished: {summary['projected']} projected, {summary['skipped']} skipped",
                extra=summary)
    return report
