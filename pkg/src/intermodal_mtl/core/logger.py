"""Structured logging with run context."""

import json
import logging
import os
import sys
from datetime import datetime, timezone
from functools import wraps
from typing import Any, Dict, Optional

LOG_LEVEL_ENV = "INTERMODAL_MTL_LOG_LEVEL"

# Extra fields promoted to top-level keys of the JSON record
_CONTEXT_FIELDS = (
    'run_id',
    'command',
    'mode',
    'modalities',
    'seed',
    'epoch',
    'step',
    'video_id',
    'path',
    'event',
    'details',
)


class _JsonFormatter(logging.Formatter):
    """One JSON object per record."""

    def format(self, record: logging.LogRecord) -> str:
        log_data: Dict[str, Any] = {
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
        }
        for key in _CONTEXT_FIELDS:
            if hasattr(record, key):
                log_data[key] = getattr(record, key)
        return json.dumps(log_data, default=str)


class RunContextLogger:
    """Logger that stamps every record with the current run context."""

    def __init__(self, name: str):
        self.logger = logging.getLogger(name)
        self.logger.setLevel(os.environ.get(LOG_LEVEL_ENV, 'INFO').upper())
        self.logger.propagate = False

        if not self.logger.handlers:
            # stderr keeps stdout free for reports
            handler = logging.StreamHandler(sys.stderr)
            handler.setFormatter(_JsonFormatter())
            self.logger.addHandler(handler)

        self._run_context: Dict[str, Any] = {}

    def set_context(self, **kwargs):
        """Set run context for subsequent logs."""
        self._run_context.update(kwargs)

    def clear_context(self):
        """Clear run context."""
        self._run_context.clear()

    def _add_context(self, extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        log_extra = self._run_context.copy()
        if extra:
            log_extra.update(extra)
        return log_extra

    def info(self, message: str, **kwargs):
        """Log info message with context."""
        self.logger.info(message, extra=self._add_context(kwargs))

    def warning(self, message: str, **kwargs):
        """Log warning message with context."""
        self.logger.warning(message, extra=self._add_context(kwargs))

    def error(self, message: str, **kwargs):
        """Log error message with context."""
        self.logger.error(message, extra=self._add_context(kwargs))

    def critical(self, message: str, **kwargs):
        """Log critical message with context."""
        self.logger.critical(message, extra=self._add_context(kwargs))

    def debug(self, message: str, **kwargs):
        """Log debug message with context."""
        self.logger.debug(message, extra=self._add_context(kwargs))

    def epoch_completed(
        self,
        epoch: int,
        train_loss: float,
        dev_loss: Optional[float] = None,
        dev_score: Optional[float] = None,
        step: Optional[int] = None,
    ):
        """Log the end-of-epoch summary."""
        self.info(
            f'Epoch {epoch} completed',
            event='epoch_completed',
            epoch=epoch,
            step=step,
            details={
                'train_loss': train_loss,
                'dev_loss': dev_loss,
                'dev_score': dev_score,
            }
        )

    def numeric_failure(self, reason: str, details: Optional[Dict[str, Any]] = None):
        """Log a numeric failure (non-finite loss, NaN input, ...)."""
        self.critical(
            f'Numeric failure: {reason}',
            event='numeric_failure',
            details=details or {}
        )


def log_execution(func):
    """Decorator to log function execution."""
    @wraps(func)
    def wrapper(*args, **kwargs):
        logger = get_logger(func.__module__)
        logger.info(f'Executing {func.__name__}')
        try:
            result = func(*args, **kwargs)
            logger.info(f'{func.__name__} completed successfully')
            return result
        except Exception as e:
            logger.error(
                f'{func.__name__} failed: {str(e)}',
                details={'error_type': type(e).__name__}
            )
            raise
    return wrapper


def get_logger(name: str) -> RunContextLogger:
    """Get or create logger with name."""
    return RunContextLogger(name)
