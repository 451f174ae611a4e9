"""Exception hierarchy shared by every framesum module.

All toolkit errors derive from :class:`FrameToolkitError`, so callers can
catch one base class at pipeline boundaries while tests assert on the
specific subclass.
"""


class FrameToolkitError(Exception):
    """Base class for every error raised by this package."""


class NotHermitianError(FrameToolkitError):
    """Matrix fails the Hermitian symmetry check."""


class NoConvergenceError(FrameToolkitError):
    """Iterative eigensolver exhausted its sweep budget."""


class SingularOperatorError(FrameToolkitError):
    """Positive-definite solve requested for a numerically singular matrix."""


class DimensionMismatchError(FrameToolkitError):
    """Vector or matrix dimensions do not line up."""


class CountMismatchError(FrameToolkitError):
    """Two frames were expected to have the same number of vectors."""


class NotAFrameError(FrameToolkitError):
    """Vector family does not span: smallest frame-operator eigenvalue is zero."""


class NotTightError(FrameToolkitError):
    """Tight-frame reconstruction requested without a tightness certificate."""


class InvalidBoundsError(FrameToolkitError):
    """Bound pair violates 0 < lower <= upper (or is not finite)."""


class ZeroCoefficientError(FrameToolkitError):
    """Weighted-sum coefficients must all be nonzero."""


class AlignmentMismatchError(FrameToolkitError):
    """Summed frames must share dimension and vector count."""


class InconsistentSpecError(FrameToolkitError):
    """Caller-supplied operator norms disagree with recomputed singular values."""


class NonPositiveLowerBoundError(FrameToolkitError):
    """Window estimate produced a non-positive lower bound; no frame conclusion."""


class EmptySupportError(FrameToolkitError):
    """Piecewise generator has no support."""


class DegenerateLatticeError(FrameToolkitError):
    """Group parameters collapse the time-frequency lattice."""


class GridMismatchError(FrameToolkitError):
    """Sampled signal grid is not uniform or does not cover the window support."""


class InvalidBoundsForFrameError(FrameToolkitError):
    """Bound pair handed to the reconstruction algorithm is not valid for the frame."""


class SpecParseError(FrameToolkitError):
    """Experiment file is not syntactically valid JSON."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class SpecSchemaError(FrameToolkitError):
    """Experiment file parsed but violates the experiment schema."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
