"""Pipeline configuration file and the resources a command loads from it."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from functools import cached_property
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from utils.config import DEFAULT_OUTPUT_DIR, DEFAULT_SEED
from utils.detection import DetectionConfig, Query
from utils.errors import ConfigError, InputNotFoundError, ToolkitError
from utils.eventstore import EventRecord, TfIdfModel, build_tfidf, filter_events, load_events
from utils.expansion import ExpandedQuery, ExpansionConfig, ExpansionVariant, expand
from utils.logger import get_logger
from utils.projection import ProjectionConfig, ProjectionReport, project_all
from utils.retrieval import (
    InvertedIndex,
    Ranking,
    RetrievalConfig,
    index_corpus,
    interpolate,
    load_corpus,
    rank,
)
from utils.trec import Qrels, parse_qrels, parse_trec_topics
from utils.vecspace import ModelBundle, TemporalModelSet, load_model, load_temporal_models

logger = get_logger()

PATH_KEYS = ("static_model", "temporal_dir", "enriched_dir", "events",
             "corpus", "topics", "qrels", "output_dir")


@dataclass
class PipelinePaths:
    static_model: Optional[str] = None
    temporal_dir: Optional[str] = None
    enriched_dir: Optional[str] = None
    events: Optional[str] = None
    corpus: Optional[str] = None
    topics: Optional[str] = None
    qrels: Optional[str] = None
    output_dir: str = DEFAULT_OUTPUT_DIR

    def resolved(self, base_dir: str) -> "PipelinePaths":
        """Relative paths are taken relative to ``base_dir``."""
        values = {}
        for key in PATH_KEYS:
            value = getattr(self, key)
            if value is not None and not os.path.isabs(value):
                value = os.path.normpath(os.path.join(base_dir, value))
            values[key] = value
        return PipelinePaths(**values)


@dataclass
class PipelineConfig:
    paths: PipelinePaths = field(default_factory=PipelinePaths)
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    expansion: ExpansionConfig = field(default_factory=ExpansionConfig)
    projection: ProjectionConfig = field(default_factory=ProjectionConfig)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    seed: int = DEFAULT_SEED
    filter_events: bool = True

    def __post_init__(self) -> None:
        # one seed drives every stochastic choice
        self.projection.seed = self.seed

    # -- serialization ----------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        projection = self.projection.to_dict()
        projection.pop("seed")
        return {
            "paths": {key: getattr(self.paths, key) for key in PATH_KEYS},
            "detection": self.detection.to_dict(),
            "expansion": self.expansion.to_dict(),
            "projection": projection,
            "retrieval": self.retrieval.to_dict(),
            "seed": self.seed,
            "filter_events": self.filter_events,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PipelineConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        _reject_unknown("", data, {"paths", "detection", "expansion", "projection",
                                   "retrieval", "seed", "filter_events"})

        paths = _section(data, "paths")
        _reject_unknown("paths", paths, set(PATH_KEYS))

        detection = _section(data, "detection")
        _reject_unknown("detection", detection, _field_names(DetectionConfig))

        expansion = dict(_section(data, "expansion"))
        allowed = (_field_names(ExpansionConfig) - {"lambda_"}) | {"lambda"}
        _reject_unknown("expansion", expansion, allowed)
        if "lambda" in expansion:
            expansion["lambda_"] = expansion.pop("lambda")
        if "disabled_features" in expansion:
            expansion["disabled_features"] = tuple(expansion["disabled_features"])

        projection = _section(data, "projection")
        _reject_unknown("projection", projection, _field_names(ProjectionConfig) - {"seed"})

        retrieval = _section(data, "retrieval")
        _reject_unknown("retrieval", retrieval, _field_names(RetrievalConfig))

        try:
            return cls(
                paths=PipelinePaths(**paths),
                detection=DetectionConfig(**detection),
                expansion=ExpansionConfig(**expansion),
                projection=ProjectionConfig(**projection),
                retrieval=RetrievalConfig(**retrieval),
                seed=int(data.get("seed", DEFAULT_SEED)),
                filter_events=bool(data.get("filter_events", True)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid configuration value: {exc}")

    def with_overrides(self, seed: Optional[int] = None, variant: Optional[str] = None,
                       scorer: Optional[str] = None, output_dir: Optional[str] = None) -> "PipelineConfig":
        """Copy with command-line overrides applied."""
        config = PipelineConfig.from_dict(self.to_dict())
        if seed is not None:
            config.seed = seed
            config.projection.seed = seed
        if variant is not None:
            config.expansion = replace(config.expansion, variant=variant)
        if scorer is not None:
            config.detection = replace(config.detection, scorer=scorer)
        if output_dir is not None:
            config.paths.output_dir = output_dir
        return config

    def require(self, *keys: str) -> None:
        """Every named path must be configured and exist."""
        for key in keys:
            value = getattr(self.paths, key)
            if value is None:
                raise ConfigError(f"configuration is missing paths.{key}")
            if not os.path.exists(value):
                raise InputNotFoundError(value, key)


def _field_names(cls) -> set:
    return {f.name for f in fields(cls)}


def _section(data: Dict[str, Any], key: str) -> Dict[str, Any]:
    section = data.get(key, {}) or {}
    if not isinstance(section, dict):
        raise ConfigError(f"'{key}' must be an object")
    return section


def _reject_unknown(section: str, data: Dict[str, Any], allowed: Iterable[str]) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        prefix = f"{section}." if section else ""
        raise ConfigError(f"unknown configuration key(s): {', '.join(prefix + k for k in unknown)}")


def load_pipeline_config(path: Optional[str]) -> PipelineConfig:
    """Read a JSON configuration; no path gives the defaults."""
    if path is None:
        return PipelineConfig()
    if not os.path.exists(path):
        raise InputNotFoundError(path, "configuration file")
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})")
    config = PipelineConfig.from_dict(data)
    config.paths = config.paths.resolved(os.path.dirname(os.path.abspath(path)))
    return config


def save_pipeline_config(config: PipelineConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(config.to_dict(), handle, indent=2, sort_keys=True)
        handle.write("\n")


# =============================================================================
# Resources
# =============================================================================

class PipelineResources:
    """Inputs named by a configuration, loaded on first use."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.projection_report: Optional[ProjectionReport] = None

    @cached_property
    def all_events(self) -> List[EventRecord]:
        self.config.require("events")
        return load_events(self.config.paths.events)

    @cached_property
    def events(self) -> List[EventRecord]:
        if not self.config.filter_events:
            return self.all_events
        kept = filter_events(self.all_events)
        logger.info(f"{len(kept)} of {len(self.all_events)} events pass the dataset filters")
        return kept

    @cached_property
    def tfidf(self) -> TfIdfModel:
        return build_tfidf(self.events)

    @cached_property
    def models(self) -> ModelBundle:
        self.config.require("static_model")
        static = load_model(self.config.paths.static_model, label="static")
        return ModelBundle(static=static, temporal=self._temporal_models(static))

    def _temporal_models(self, static) -> TemporalModelSet:
        paths = self.config.paths
        if paths.enriched_dir is not None and os.path.isdir(paths.enriched_dir):
            return load_temporal_models(paths.enriched_dir)
        if paths.temporal_dir is None:
            if self.config.expansion.variant == ExpansionVariant.TEMPORAL:
                logger.warning("No temporal models configured; the temporal variant uses the static model")
            return TemporalModelSet()
        self.config.require("temporal_dir")
        temporal = load_temporal_models(paths.temporal_dir)
        logger.info("No enriched models; projecting events in memory")
        self.projection_report = project_all(self.events, static, temporal, self.config.projection)
        return temporal

    @cached_property
    def index(self) -> InvertedIndex:
        self.config.require("corpus")
        return index_corpus(load_corpus(self.config.paths.corpus))

    @cached_property
    def topics(self) -> List[Tuple[str, Query]]:
        self.config.require("topics")
        return parse_trec_topics(self.config.paths.topics)

    @cached_property
    def qrels(self) -> Qrels:
        self.config.require("qrels")
        return parse_qrels(self.config.paths.qrels)


# =============================================================================
# Query pipeline
# =============================================================================

def expand_query(resources: PipelineResources, query: Query,
                 expansion: Optional[ExpansionConfig] = None) -> ExpandedQuery:
    config = resources.config
    return expand(query, expansion or config.expansion, resources.events, resources.models,
                  resources.tfidf, detection_config=config.detection)


def search_query(resources: PipelineResources, query: Query,
                 expansion: Optional[ExpansionConfig] = None,
                 baseline: bool = False) -> Tuple[Ranking, ExpandedQuery]:
    """Rank the corpus for one query, expanded unless ``baseline`` is set."""
    config = resources.config
    if baseline:
        expanded = ExpandedQuery(original=query, variant=config.expansion.variant)
    else:
        expanded = expand_query(resources, query, expansion)
    model = interpolate(expanded, config.retrieval)
    return rank(resources.index, model, config.retrieval.depth), expanded


def run_topics(resources: PipelineResources, topics: Sequence[Tuple[str, Query]],
               expansion: Optional[ExpansionConfig] = None,
               baseline: bool = False) -> Dict[str, Ranking]:
    """A ranking per topic; a failing topic gets an empty ranking and the run goes on."""
    run: Dict[str, Ranking] = {}
    for qid, query in topics:
        try:
            run[qid], _ = search_query(resources, query, expansion, baseline)
        except ToolkitError as exc:
            logger.error(f"Query {qid} failed: {exc.message}", extra={'qid': qid, 'error_code': exc.code})
            run[qid] = []
    return run
