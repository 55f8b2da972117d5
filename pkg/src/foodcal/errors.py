"""Exception hierarchy shared across the pipeline.

Every error raised by this package derives from FoodcalError so callers can
catch pipeline failures without also swallowing programming errors.
"""

from __future__ import annotations


class FoodcalError(Exception):
    """Base class for all errors raised by foodcal."""


# --- ingest ---------------------------------------------------------------

class MissingFile(FoodcalError):
    pass


class ParseError(FoodcalError):
    pass


class DecodeError(FoodcalError):
    pass


class TooSmall(FoodcalError):
    pass


class InvariantViolation(FoodcalError):
    """A record (or a batch of records) violated a documented invariant.

    ``diagnostics`` lists every offending record as ``(pair_id, reason)`` so a
    failed load never hides part of the damage.
    """

    def __init__(self, message: str, diagnostics: list[tuple[str, str]] | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


# --- detect ---------------------------------------------------------------

class DetectionError(FoodcalError):
    """Base for scene-validation failures."""


class NoCoin(DetectionError):
    pass


class MultipleCoins(DetectionError):
    pass


class NoFood(DetectionError):
    pass


class TooManyFoods(DetectionError):
    pass


class DuplicateFoodLabels(DetectionError):
    pass


class LabelMismatch(DetectionError):
    """Top- and side-view food label sets disagree."""


class MissingAnnotations(FoodcalError):
    pass


class SchemaError(FoodcalError):
    pass


# --- calibrate ------------------------------------------------------------

class NoCircle(FoodcalError):
    pass


class BoxTooSmall(FoodcalError):
    pass


# --- segment --------------------------------------------------------------

class DegenerateColors(FoodcalError):
    pass


class EmptyForeground(FoodcalError):
    pass


# --- measure --------------------------------------------------------------

class EmptyMask(FoodcalError):
    pass


class DegenerateExtent(FoodcalError):
    pass


class UnknownFood(FoodcalError):
    pass


# --- nutrition ------------------------------------------------------------

class NonpositiveVolume(FoodcalError):
    pass


# --- evaluate -------------------------------------------------------------

class EmptyInput(FoodcalError):
    pass


class NoEvaluableRecords(FoodcalError):
    pass


# --- config / cli ---------------------------------------------------------

class ConfigError(FoodcalError):
    """Bad configuration values; treated as a usage error by the CLI."""


class StageFailure(FoodcalError):
    """Wraps an error from one pipeline stage with the stage's name.

    ``reason`` is the wrapped error's class name, e.g. "NoCoin", which is the
    stable identifier reported by the CLI and the evaluation harness.
    """

    def __init__(self, stage: str, cause: FoodcalError):
        super().__init__(f"{stage}: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
        self.reason = type(cause).__name__
