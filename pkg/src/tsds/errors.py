"""Exception hierarchy shared by every layer.

Each error carries a stable machine-readable ``name`` (used verbatim in HTTP
error bodies) and, for parse-stage errors, a character ``position`` into the
offending string.
"""

from __future__ import annotations


class TsdsError(Exception):
    """Base class for all errors raised by this package."""

    #: machine-readable error name; defaults to the class name
    name: str = "TsdsError"

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if "name" not in cls.__dict__:
            cls.name = cls.__name__

    def __init__(self, message: str = "", position: int | None = None):
        super().__init__(message)
        self.position = position

    def __str__(self) -> str:
        base = super().__str__()
        if self.position is not None:
            return f"{base} (position {self.position})"
        return base


# --- flat binary store ---------------------------------------------------

class InvalidKey(TsdsError):
    pass


class IndexNegative(TsdsError):
    pass


class IndexInverted(TsdsError):
    pass


class MalformedDigest(TsdsError):
    pass


# --- metadata / catalog ---------------------------------------------------

class XmlMalformed(TsdsError):
    pass


class MissingRequired(TsdsError):
    pass


class LengthMismatch(TsdsError):
    pass


class MalformedId(TsdsError):
    pass


class UnknownUnit(TsdsError):
    pass


class BadEpoch(TsdsError):
    pass


class NotFound(TsdsError):
    pass


# --- constraint expressions / query engine --------------------------------

class ConstraintSyntaxError(TsdsError):
    """Malformed constraint expression; ``position`` is always set."""

    name = "SyntaxError"


class UnknownFilter(TsdsError):
    pass


class ArityError(TsdsError):
    pass


class MultipleFilters(TsdsError):
    pass


class BadTimestamp(TsdsError):
    pass


class UnknownVariable(TsdsError):
    pass


class BadArg(TsdsError):
    pass


# --- ingest ----------------------------------------------------------------

class NoGranules(TsdsError):
    pass


class SchemaMismatch(TsdsError):
    pass


class BuildLocked(TsdsError):
    pass


# --- encoders ---------------------------------------------------------------

class BadFormatFragment(TsdsError):
    pass


class UnknownSuffix(TsdsError):
    pass
