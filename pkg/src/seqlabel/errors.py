"""Typed error taxonomy shared across the toolkit.

Validation is total: malformed input raises one of these, never a
partially constructed value.
"""


class SeqLabelError(Exception):
    """Base class for every error raised by this package."""


class MissingFile(SeqLabelError):
    pass


class IoFailure(SeqLabelError):
    pass


class MalformedManifest(SeqLabelError):
    """Manifest document is structurally invalid (bad JSON, missing/ill-typed fields)."""


class InvariantViolation(SeqLabelError):
    """A domain invariant does not hold (duplicate id, bad class index, ...)."""


class UnsupportedPng(SeqLabelError):
    """Mask file is not an 8-bit single-channel grayscale PNG."""


class ValueOutOfRange(SeqLabelError):
    pass


class BadMagic(SeqLabelError):
    pass


class TruncatedFile(SeqLabelError):
    pass


class NonFiniteValue(SeqLabelError):
    pass


class DimensionMismatch(SeqLabelError):
    pass


class UndecodableImage(SeqLabelError):
    pass


class MissingFeatureFile(SeqLabelError):
    pass


class EmptyLabelSet(SeqLabelError):
    pass


class ConfigInvariantViolation(SeqLabelError):
    pass


class AnnotationHasIgnorePixels(SeqLabelError):
    pass


class NoScorableClass(SeqLabelError):
    pass


class NoPixels(SeqLabelError):
    pass


class MissingAnnotation(SeqLabelError):
    """One or more sequences lack the required annotation file."""

    def __init__(self, sequence_ids):
        self.sequence_ids = sorted(sequence_ids)
        super().__init__(f"missing annotations for sequences: {', '.join(self.sequence_ids)}")


class NoOverlap(SeqLabelError):
    """No image has both a prediction and a ground-truth mask."""


class WorkspaceLocked(SeqLabelError):
    pass
