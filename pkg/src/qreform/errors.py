"""Exception hierarchy shared across the toolkit.

Three failure families map onto the CLI's distinct exit codes: configuration
problems, data-validation problems, and plain I/O problems.
"""

from __future__ import annotations


class QreformError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(QreformError):
    """Bad or inconsistent configuration (unknown signal kind, bad threshold, ...)."""


class SpecError(ConfigError):
    """Degenerate generator spec (zero sessions, empty vocabulary, ...)."""


class ValidationError(QreformError):
    """Input data violates an invariant. Carries location context when known."""

    def __init__(self, message: str, *, line: int | None = None,
                 offset: int | None = None, session: str | None = None):
        self.line = line
        self.offset = offset
        self.session = session
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if offset is not None:
            parts.append(f"byte {offset}")
        if session is not None:
            parts.append(f"session {session!r}")
        where = f" ({', '.join(parts)})" if parts else ""
        super().__init__(f"{message}{where}")


class InputError(QreformError, ValueError):
    """An operation was called on inputs outside its domain (empty source, ...)."""
