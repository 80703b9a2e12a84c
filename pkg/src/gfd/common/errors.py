"""Structured exceptions shared across the toolkit.

Every error carries a message, a context dict and a UTC timestamp so the CLI
can report it with the failing stage and offending value.
"""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Any, Dict, Optional


class FaultDetectionError(Exception):
    """Base error with structured context."""

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.context = context or {}
        self.timestamp = datetime.now(timezone.utc)

    def to_dict(self) -> Dict[str, Any]:
        error: Dict[str, Any] = {
            "type": type(self).__name__,
            "message": self.message,
            "timestamp": self.timestamp.isoformat(),
        }
        if self.context:
            error["context"] = self.context
        return {"error": error}


class ValidationError(FaultDetectionError):
    """Raised when an invariant or precondition is violated."""

    def __init__(self, message: str, field: Optional[str] = None, value: Optional[Any] = None):
        context: Dict[str, Any] = {}
        if field:
            context["field"] = field
        if value is not None:
            context["value"] = str(value)[:100]  # Truncate long values
        super().__init__(message, context)
        self.field = field


class ParseError(FaultDetectionError):
    """Raised when an interchange stream is malformed."""

    def __init__(self, message: str, line: Optional[int] = None):
        context: Dict[str, Any] = {}
        if line is not None:
            context["line"] = line
            message = f"line {line}: {message}"
        super().__init__(message, context)
        self.line = line


class BundleError(FaultDetectionError):
    """Raised when a model bundle cannot be written or read back intact."""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message, {"path": path} if path else None)


class StageError(FaultDetectionError):
    """Wraps a failure inside a benchmark or CLI stage."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}", {"stage": stage, "cause": type(cause).__name__})
        self.stage = stage
        self.cause = cause
