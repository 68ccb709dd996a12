"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: input/config problems exit 2, backend
problems exit 3, data/shape problems exit 4.
"""


class EntailsumError(Exception):
    """Base class for all toolkit errors."""


# --- input / configuration (CLI exit code 2) ---

class EmptyInput(EntailsumError):
    """Text was empty or whitespace-only."""


class UnsupportedGranularity(EntailsumError):
    """Granularity not allowed for this side (summaries: full or sentence only)."""


class ConfigError(EntailsumError):
    """Invalid or unknown configuration key/value."""


# --- backends (CLI exit code 3) ---

class EmptyPair(EntailsumError):
    """A premise or hypothesis was empty (or had no tokens)."""


class BackendUnavailable(EntailsumError):
    """Remote scoring backend unreachable or returned an invalid response."""


class FixtureMiss(EntailsumError):
    """A (premise, hypothesis) pair is absent from the fixture file."""


class ExtractorUnavailable(EntailsumError):
    """External entity extractor could not be spawned or spoke a bad protocol."""


# --- data / shapes (CLI exit code 4) ---

class DimensionZero(EntailsumError):
    """A pair matrix side has zero blocks."""


class OutOfRangeScore(EntailsumError):
    """A probability fell outside [0, 1]."""


class ModelShapeMismatch(EntailsumError):
    """Model weight length does not match h x number of categories."""


class DegenerateLabels(EntailsumError):
    """Training/validation data contains a single class."""


class SchemaMismatch(EntailsumError):
    """A raw dataset record does not match the adapter's documented schema."""


class SingleClassLabels(EntailsumError):
    """A metric requiring both classes received single-class labels."""


class UnequalRaterCounts(EntailsumError):
    """Fleiss' kappa table rows have differing rater counts."""


class UndefinedAgreement(EntailsumError):
    """Chance agreement is 1 with imperfect observed agreement."""
