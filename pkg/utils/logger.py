"""
Structured logging configuration with run ID support.
"""
import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from typing import Optional, Union

from utils.config import LOGS_DIR, LOGGER_NAME, LOG_LEVEL


class RunIdFilter(logging.Filter):
    """Filter to add the current run ID to log records."""

    def filter(self, record):
        from utils.run_id import get_run_id

        record.run_id = get_run_id() or 'N/A'
        return True


def setup_logging(level: Optional[Union[str, int]] = None):
    """
    Configure structured logging with file and console handlers.
    Includes the run ID in log messages for correlation.

    Args:
        level: Console log level (defaults to EVENT_QE_LOG_LEVEL / INFO)
    """
    # Ensure logs directory exists
    os.makedirs(LOGS_DIR, exist_ok=True)

    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(logging.DEBUG)

    # Prevent duplicate handlers
    if logger.handlers:
        if level is not None:
            set_console_level(logger, level)
        return logger

    run_id_filter = RunIdFilter()

    # File handler with rotation (10MB max, keep 5 backups)
    log_file = os.path.join(LOGS_DIR, 'event_qe.log')
    file_handler = RotatingFileHandler(
        log_file,
        maxBytes=10 * 1024 * 1024,  # 10MB
        backupCount=5
    )
    file_handler.setLevel(logging.DEBUG)
    file_handler.addFilter(run_id_filter)
    file_handler.setFormatter(logging.Formatter(
        '%(asctime)s [%(levelname)s] [%(run_id)s] %(name)s: %(message)s [%(filename)s:%(lineno)d]'
    ))

    # Console handler on stderr; stdout carries command output
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level if level is not None else LOG_LEVEL)
    console_handler.addFilter(run_id_filter)
    console_handler.setFormatter(logging.Formatter(
        '[%(levelname)s] [%(run_id)s] %(message)s'
    ))

    logger.addHandler(file_handler)
    logger.addHandler(console_handler)

    return logger


def set_console_level(logger: logging.Logger, level: Union[str, int]) -> None:
    """Adjust only the console handler's level."""
    for handler in logger.handlers:
        if isinstance(handler, logging.StreamHandler) and not isinstance(handler, RotatingFileHandler):
            handler.setLevel(level)


# Global logger instance
_logger = None


def get_logger():
    """Get the global logger instance."""
    global _logger
    if _logger is None:
        _logger = setup_logging()
    return _logger
