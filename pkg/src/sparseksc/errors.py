"""Exception classes raised by the sparseksc package.

Plain argument errors (bad shapes, out-of-range indices) raise the builtin
ValueError; everything that is a *domain* failure of the pipeline raises a
KscError subclass so callers (and the CLI) can report the error class.
"""


class KscError(Exception):
    """Base class for sparse-KSC domain failures."""


class FactorizationError(KscError):
    """Low-rank decomposition or linear solve failed."""


class DegreeError(KscError):
    """A kernel degree is zero or negative; the weighted problem is undefined."""


class EncodingError(KscError):
    """Cluster encoding failed (e.g. fewer distinct sign patterns than clusters)."""


class ModelFormatError(KscError):
    """A persisted model file is malformed or has an unsupported version."""


class ImageFormatError(KscError):
    """A PPM/PGM image file is malformed or unsupported."""
