"""Semantic exception hierarchy shared across the package."""

from __future__ import annotations


class IoslabError(Exception):
    """Base class for all package-specific failures."""


class DomainError(IoslabError):
    """Argument outside the mathematical domain (negative radius, bad knots)."""


class ClassError(IoslabError):
    """A comparison function does not satisfy its declared class."""


class FitError(IoslabError):
    """Envelope or gain fitting received data it cannot dominate."""


class ParseError(IoslabError):
    """System descriptor text is malformed; carries line/column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, col {column}: {message}")
        self.line = line
        self.column = column


class IntegrationError(IoslabError):
    """The right-hand side produced NaN/Inf outside a blow-up scenario."""


class BlowUpError(IoslabError):
    """A probe blew up before the quantity of interest could be computed."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class CertificateError(IoslabError):
    """Certificate parameters do not match the property's requirements."""


class TableGapError(IoslabError):
    """A table-backed function was queried outside its certified region."""


class EstimationError(IoslabError):
    """A property cannot be estimated from bounded-horizon data."""
