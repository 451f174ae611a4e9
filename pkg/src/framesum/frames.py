"""Finite frames and their spectral bound certificates.

A finite frame is a family of vectors ``{f_k}`` in ``C^d`` whose analysis
energy ``sum_k |<f, f_k>|^2`` is pinched between ``A ||f||^2`` and
``B ||f||^2`` for every ``f``.  The optimal constants are the extreme
eigenvalues of the frame operator ``S = sum_k f_k f_k*``, which is what
:func:`exact_bounds` reports; theorem-predicted pairs elsewhere in the package
are always labelled as predictions and checked against this oracle.

Inner products conjugate the *second* argument: ``<f, g> = sum f_i conj(g_i)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    CountMismatchError,
    DimensionMismatchError,
    InvalidBoundsError,
    NotAFrameError,
    NotTightError,
)

#: width at or below which a frame is certified tight.
TIGHTNESS_TOLERANCE = 1e-10

#: additional |A - 1| tolerance for the Parseval flag.
PARSEVAL_TOLERANCE = 1e-10

#: relative spectral floor below which the family does not count as a frame.
SPAN_TOLERANCE = 1e-12

#: max residual accepted by verify_dual.
DUAL_RESIDUAL_TOLERANCE = 1e-9


@dataclass(frozen=True)
class FrameBounds:
    """A valid bound pair ``0 < lower <= upper`` (not necessarily optimal)."""

    lower: float
    upper: float

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise InvalidBoundsError("bounds must be finite")
        if not (0.0 < lo <= hi):
            raise InvalidBoundsError(f"need 0 < lower <= upper, got ({lo}, {hi})")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def width(self) -> float:
        return (self.upper - self.lower) / (self.upper + self.lower)


def width(bounds: FrameBounds) -> float:
    """Tightness measure ``(B - A) / (B + A)``, in ``[0, 1)``."""
    if not isinstance(bounds, FrameBounds):
        bounds = FrameBounds(*bounds)
    return bounds.width


@dataclass(frozen=True)
class FrameCertificate:
    """Spectral bound certificate: optimal bounds plus tightness flags."""

    bounds: FrameBounds
    width: float
    is_tight: bool
    is_parseval: bool


class FiniteFrame:
    """An indexed family of complex vectors in a common dimension.

    Vectors are stored as rows of an immutable ``(count, dim)`` array.
    Individual zero vectors are allowed (they contribute nothing); an
    all-zero family is rejected.
    """

    __slots__ = ("_vectors",)

    def __init__(self, vectors):
        arr = np.asarray(vectors, dtype=complex)
        if arr.ndim == 1:
            arr = arr[np.newaxis, :]
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise DimensionMismatchError(
                f"expected a nonempty family of equal-length vectors, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
            raise DimensionMismatchError("frame vectors must be finite")
        if not np.any(arr):
            raise NotAFrameError("all vectors are zero")
        arr = arr.copy()
        arr.setflags(write=False)
        self._vectors = arr

    @property
    def vectors(self) -> np.ndarray:
        return self._vectors

    @property
    def dim(self) -> int:
        return self._vectors.shape[1]

    @property
    def count(self) -> int:
        return self._vectors.shape[0]

    def __len__(self) -> int:
        return self.count

    def __getitem__(self, k) -> np.ndarray:
        return self._vectors[k]

    def __repr__(self) -> str:
        return f"FiniteFrame(count={self.count}, dim={self.dim})"


def frame_operator(frame: FiniteFrame) -> np.ndarray:
    """Hermitian positive semidefinite ``S = sum_k f_k f_k*`` as a dense matrix."""
    v = frame.vectors
    s = v.T @ v.conj()
    return (s + s.conj().T) / 2.0


def analysis(frame: FiniteFrame, f) -> np.ndarray:
    """Analysis coefficients ``c_k = <f, f_k>``."""
    vec = linalg.as_cvector(f)
    if vec.shape[0] != frame.dim:
        raise DimensionMismatchError(
            f"signal has length {vec.shape[0]}, frame dimension is {frame.dim}"
        )
    return frame.vectors.conj() @ vec


def synthesis(frame: FiniteFrame, coefficients) -> np.ndarray:
    """Synthesis ``sum_k c_k f_k`` for a coefficient vector aligned with the frame."""
    c = np.asarray(coefficients, dtype=complex)
    if c.ndim != 1 or c.shape[0] != frame.count:
        raise DimensionMismatchError(
            f"coefficient vector has shape {c.shape}, frame has {frame.count} vectors"
        )
    return frame.vectors.T @ c


def exact_bounds(frame: FiniteFrame) -> FrameCertificate:
    """Optimal frame bounds: the extreme eigenvalues of the frame operator.

    Raises :class:`NotAFrameError` when the family fails to span (smallest
    eigenvalue at or below ``SPAN_TOLERANCE`` times the largest).
    """
    eig = linalg.hermitian_eig(frame_operator(frame))
    lo = float(eig.eigenvalues[0])
    hi = float(eig.eigenvalues[-1])
    if hi <= 0.0 or lo <= SPAN_TOLERANCE * hi:
        raise NotAFrameError(
            f"vectors do not span: extreme eigenvalues ({lo:.3e}, {hi:.3e})"
        )
    bounds = FrameBounds(lo, hi)
    w = bounds.width
    tight = w <= TIGHTNESS_TOLERANCE
    parseval = tight and abs(lo - 1.0) <= PARSEVAL_TOLERANCE
    return FrameCertificate(bounds=bounds, width=w, is_tight=tight, is_parseval=parseval)


def canonical_dual(frame: FiniteFrame) -> FiniteFrame:
    """The canonical dual family ``{S^-1 f_k}``.

    Its optimal bounds are ``(1/B, 1/A)`` whenever the input has optimal
    bounds ``(A, B)``.
    """
    exact_bounds(frame)  # reject non-frames before inverting
    s = frame_operator(frame)
    dual_vectors = linalg.hpd_inverse_apply(s, frame.vectors)
    return FiniteFrame(dual_vectors)


@dataclass(frozen=True)
class DualCheck:
    is_dual: bool
    max_residual: float


def verify_dual(frame: FiniteFrame, dual: FiniteFrame, trials: int = 100, rng=None) -> DualCheck:
    """Randomized check of the dual identity ``sum_k <f, f_k> g_k = f``.

    Draws ``trials`` random unit vectors and reports the worst reconstruction
    residual; the pair passes when that residual stays at or below
    ``DUAL_RESIDUAL_TOLERANCE``.
    """
    if frame.dim != dual.dim:
        raise DimensionMismatchError(
            f"frame dimension {frame.dim} differs from candidate dual dimension {dual.dim}"
        )
    if frame.count != dual.count:
        raise CountMismatchError(
            f"frame has {frame.count} vectors, candidate dual has {dual.count}"
        )
    if trials < 1:
        raise ValueError("trials must be positive")
    if rng is None:
        rng = np.random.default_rng(0)
    # The mixed operator G* F applied to f equals sum_k <f, f_k> g_k.
    mixed = dual.vectors.T @ frame.vectors.conj()
    worst = 0.0
    for _ in range(trials):
        f = random_unit_vector(rng, frame.dim)
        residual = float(np.linalg.norm(mixed @ f - f))
        worst = max(worst, residual)
    return DualCheck(is_dual=worst <= DUAL_RESIDUAL_TOLERANCE, max_residual=worst)


def tight_reconstruct(frame: FiniteFrame, bound: float, f) -> np.ndarray:
    """One-shot reconstruction ``(1/A) sum_k <f, f_k> f_k`` for a tight frame.

    Requires a tightness certificate; ``bound`` must agree with the certified
    tight bound.
    """
    cert = exact_bounds(frame)
    if not cert.is_tight:
        raise NotTightError(
            f"frame is not tight: width {cert.width:.3e} exceeds {TIGHTNESS_TOLERANCE:.0e}"
        )
    level = cert.bounds.lower
    if not (bound > 0.0) or abs(bound - level) > 1e-9 * level:
        raise NotTightError(f"supplied bound {bound} does not match certified bound {level}")
    return synthesis(frame, analysis(frame, f)) / bound


def random_unit_vector(rng, dim: int) -> np.ndarray:
    """Complex unit vector drawn from the rotation-invariant distribution."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    norm = np.linalg.norm(z)
    while norm == 0.0:  # measure-zero, but stay total
        z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        norm = np.linalg.norm(z)
    return z / norm
