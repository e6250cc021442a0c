"""
Standardized toolkit errors, payload helpers and the command error handler.
"""
import json
import sys
from functools import wraps
from typing import Any, Dict, Optional

import click


# Common error codes mapped to process exit codes
ERROR_CODES = {
    "VALIDATION_ERROR": 2,
    "NOT_FOUND": 3,
    "MODEL_FORMAT_ERROR": 4,
    "DATA_FORMAT_ERROR": 5,
    "DIMENSION_MISMATCH": 6,
    "OUT_OF_VOCABULARY": 7,
    "ZERO_ANCHORS": 8,
    "INTERNAL_ERROR": 1,
}


class ToolkitError(Exception):
    """Base exception for toolkit errors."""
    def __init__(self, code: str, message: str, exit_code: Optional[int] = None):
        self.code = code
        self.message = message
        self.exit_code = exit_code if exit_code is not None else ERROR_CODES.get(code, 1)
        super().__init__(self.message)


class ConfigError(ToolkitError):
    def __init__(self, message: str):
        super().__init__("VALIDATION_ERROR", message)


class InputNotFoundError(ToolkitError):
    def __init__(self, path: str, what: str = "input"):
        self.path = path
        super().__init__("NOT_FOUND", f"{what} not found: {path}")


class ModelFormatError(ToolkitError):
    """Malformed embedding text file."""
    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__("MODEL_FORMAT_ERROR", f"{where}{message}")


class DimensionMismatchError(ToolkitError):
    def __init__(self, expected: int, actual: int, context: str = "vector"):
        self.expected = expected
        self.actual = actual
        super().__init__(
            "DIMENSION_MISMATCH",
            f"{context} has dimension {actual}, expected {expected}",
        )


class ZeroNormError(ToolkitError):
    def __init__(self, context: str = "vector"):
        super().__init__("VALIDATION_ERROR", f"{context} has zero norm; cosine is undefined")


class OutOfVocabularyError(ToolkitError):
    """A token is missing from an embedding model."""
    def __init__(self, token: str, model_label: str = ""):
        self.token = token
        self.model_label = model_label
        label = f" in model '{model_label}'" if model_label else ""
        super().__init__("OUT_OF_VOCABULARY", f"token '{token}' not found{label}")


class ZeroAnchorError(ToolkitError):
    """No anchor words are shared between the source and target models."""
    def __init__(self, event: str, model_label: str = ""):
        self.event = event
        self.model_label = model_label
        super().__init__(
            "ZERO_ANCHORS",
            f"event '{event}' has no anchors shared with model '{model_label}'",
        )


class EventDataError(ToolkitError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__("DATA_FORMAT_ERROR", f"{prefix}{message}")


class CorpusError(ToolkitError):
    def __init__(self, message: str):
        super().__init__("DATA_FORMAT_ERROR", message)


class TrecFormatError(ToolkitError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__("DATA_FORMAT_ERROR", f"{prefix}{message}")


def success_payload(data: Any = None, message: Optional[str] = None) -> Dict:
    """
    Standard success payload format.

    Args:
        data: Payload data (optional)
        message: Optional success message

    Returns:
        Dict with standardized success format
    """
    from utils.run_id import get_run_id

    payload = {"ok": True, "status": "success"}
    if data is not None:
        payload["data"] = data
    if message:
        payload["message"] = message

    run_id = get_run_id()
    if run_id:
        payload["runId"] = run_id

    return payload


def error_payload(code: str, message: str, **kwargs) -> Dict:
    """
    Standard error payload format. Logs the error with its context.

    Args:
        code: Error code (e.g., "VALIDATION_ERROR", "NOT_FOUND")
        message: Error message
        **kwargs: Additional error details

    Returns:
        Dict with standardized error format
    """
    from utils.logger import get_logger
    from utils.run_id import get_run_id
    logger = get_logger()

    run_id = get_run_id()
    payload = {
        "ok": False,
        "status": "error",
        "message": message,
        "error": {
            "code": code,
            "message": message,
            "runId": run_id,
            **kwargs
        }
    }

    logger.error(
        f"Command error: {code} - {message}",
        extra={'error_code': code, 'exit_code': ERROR_CODES.get(code, 1), 'run_id': run_id}
    )
    return payload


def handle_errors(func):
    """
    Decorator for click commands: turn toolkit errors into an error payload on
    stderr and the matching exit code.
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        from utils.logger import get_logger
        logger = get_logger()
        try:
            return func(*args, **kwargs)
        except ToolkitError as e:
            payload = error_payload(e.code, e.message)
            click.echo(json.dumps(payload, sort_keys=True), err=True)
            sys.exit(e.exit_code)
        except click.exceptions.Exit:
            raise
        except click.ClickException:
            raise
        except Exception as e:
            logger.exception(
                f"Unexpected error: {type(e).__name__}",
                extra={'error_type': type(e).__name__}
            )
            payload = error_payload("INTERNAL_ERROR", "An unexpected error occurred")
            click.echo(json.dumps(payload, sort_keys=True), err=True)
            sys.exit(ERROR_CODES["INTERNAL_ERROR"])
    return wrapper
