"""Typed exception hierarchy.

Every recoverable failure raises a subclass of :class:`MoldreamError`, so
callers (in particular dataset ingestion) can skip bad records with a
recorded reason instead of crashing.
"""


class MoldreamError(Exception):
    """Base class for all package errors."""


class MoleculeError(MoldreamError):
    """Base class for molecule parsing / validation failures."""


class UnsupportedFeature(MoleculeError):
    """SMILES feature outside the supported subset (aromatics, charges,
    isotopes, elements other than C/N/O/F, ``%`` ring labels, fragments)."""


class SmilesSyntaxError(MoleculeError):
    """Malformed SMILES: unbalanced parentheses, dangling bond symbol,
    self- or duplicate ring bonds, unrecognized characters."""


class UnclosedRing(MoleculeError):
    """A ring-closure digit was opened but never closed."""


class ValenceExceeded(MoleculeError):
    """Sum of bond orders at an atom exceeds its maximum valence."""


class InvalidGraph(MoleculeError):
    """A molecular graph violates a structural invariant."""


class RingLabelsExhausted(MoleculeError):
    """More than nine ring closures open at once while writing SMILES."""


class EncodingError(MoldreamError):
    """Base class for token-encoding failures."""


class TooLong(EncodingError):
    """Token sequence exceeds the configured maximum length."""


class Unencodable(EncodingError):
    """Graph cannot be expressed in the token grammar (branch or ring
    index out of range, or a ring-closure bond of order above one)."""


class UnknownToken(MoldreamError):
    """Token text contains a symbol outside the alphabet."""


class NotOneHot(MoldreamError):
    """Matrix expected to be an exact one-hot encoding is not."""


class NonFiniteInput(MoldreamError):
    """Network input contains NaN or infinity."""


class ShapeMismatch(MoldreamError):
    """Array shapes inconsistent with the network architecture."""


class DegenerateLabels(MoldreamError):
    """Training labels have zero standard deviation."""


class ModelFormatError(MoldreamError):
    """Model file is missing, truncated, or has a wrong header."""


class EmptyInput(MoldreamError):
    """An operation requiring at least one value received none."""


class EmptyDataset(MoldreamError):
    """Ingestion produced no usable molecules."""


class FileUnreadable(MoldreamError):
    """Input file missing or not readable."""


class BadRange(MoldreamError):
    """Histogram range is empty or bin count non-positive."""


class MissingLabel(MoldreamError):
    """External label file has no entry for a molecule."""


class ConfigError(MoldreamError):
    """Malformed configuration file or invalid configuration value."""
