# Configuration and ambient stack
from .config import DATA_DIR, DEFAULT_OUTPUT_DIR, DEFAULT_SEED
from .errors import ToolkitError, error_payload, handle_errors, success_payload
from .logger import get_logger, setup_logging

# Embedding spaces and projection
from .vecspace import (
    EmbeddingModel,
    ModelBundle,
    TemporalModelSet,
    cosine,
    knn,
    load_model,
    load_temporal_models,
    save_model,
)
from .projection import ProjectionConfig, minimize, project_all, project_event, select_anchors

# Events, detection and expansion
from .eventstore import EventRecord, build_tfidf, filter_events, load_events, tfidf
from .detection import DetectionConfig, Query, classify_event_related, detect_for_query
from .expansion import ExpandedQuery, ExpansionConfig, expand, temprel

# Retrieval and evaluation
from .retrieval import RetrievalConfig, index_corpus, interpolate, load_corpus, rank
from .evaluation import compare_reports, evaluate

__all__ = [
    'DATA_DIR', 'DEFAULT_OUTPUT_DIR', 'DEFAULT_SEED',
    'ToolkitError', 'error_payload', 'handle_errors', 'success_payload',
    'get_logger', 'setup_logging',
    'EmbeddingModel', 'ModelBundle', 'TemporalModelSet', 'cosine', 'knn',
    'load_model', 'load_temporal_models', 'save_model',
    'ProjectionConfig', 'minimize', 'project_all', 'project_event', 'select_anchors',
    'EventRecord', 'build_tfidf', 'filter_events', 'load_events', 'tfidf',
    'DetectionConfig', 'Query', 'classify_event_related', 'detect_for_query',
    'ExpandedQuery', 'ExpansionConfig', 'expand', 'temprel',
    'RetrievalConfig', 'index_corpus', 'interpolate', 'load_corpus', 'rank',
    'compare_reports', 'evaluate',
]
