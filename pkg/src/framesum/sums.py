"""Sufficient conditions and predicted bounds for sums of frames.

Four predictors, one per combination rule:

* weighted finite sum ``sum_i c_i f_k^(i)`` with a pivot index,
* frame plus a verified dual,
* operator images ``T1 f_k + T2 g_k``,
* scalar perturbations ``alpha_k f_k + beta_k g_k``.

Each predictor is pure bound arithmetic; it does not look at the vectors.
:func:`certify` closes the loop by building nothing itself but comparing a
prediction against the spectral oracle bounds of an actually-built sum frame.
Strict inequalities are evaluated as ``margin > 0`` in plain double
arithmetic; a tie reports the condition as failed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import linalg
from .errors import (
    AlignmentMismatchError,
    InconsistentSpecError,
    InvalidBoundsError,
    ZeroCoefficientError,
)
from .frames import FiniteFrame, FrameBounds, exact_bounds

#: relative slack when checking that a prediction brackets the oracle bounds.
CERTIFY_TOLERANCE = 1e-9

#: tolerance for cross-checking caller-supplied operator norms.
OPERATOR_NORM_TOLERANCE = 1e-10


@dataclass(frozen=True)
class PredictedBounds:
    """Theorem-predicted bound pair plus the sufficiency-condition record.

    ``condition_margin`` is the left side minus the right side of the strict
    inequality backing the prediction; the condition holds exactly when the
    margin is positive.
    """

    lower: float
    upper: float
    condition_holds: bool
    condition_margin: float

    def __post_init__(self):
        if self.condition_holds != (self.condition_margin > 0.0):
            raise InvalidBoundsError("condition flag disagrees with its margin")
        if self.condition_holds and not (0.0 < self.lower <= self.upper):
            raise InvalidBoundsError(
                f"holding condition must give 0 < lower <= upper, got ({self.lower}, {self.upper})"
            )

    @property
    def width(self) -> float:
        return FrameBounds(self.lower, self.upper).width

    def as_bounds(self) -> FrameBounds:
        return FrameBounds(self.lower, self.upper)


def _coerce_bounds(pairs) -> list[FrameBounds]:
    out = []
    for pair in pairs:
        out.append(pair if isinstance(pair, FrameBounds) else FrameBounds(*pair))
    return out


def _coerce_coefficients(coefficients) -> np.ndarray:
    c = np.asarray(coefficients, dtype=complex)
    if c.ndim != 1 or c.size == 0:
        raise ZeroCoefficientError("coefficient list must be a nonempty vector")
    if not np.all(np.isfinite(c.real)) or not np.all(np.isfinite(c.imag)):
        raise ZeroCoefficientError("coefficients must be finite")
    if np.any(c == 0):
        raise ZeroCoefficientError("all coefficients must be nonzero")
    return c


def finite_sum_predict(bounds, coefficients, pivot: int) -> PredictedBounds:
    """Predicted bounds for a weighted sum of k frames, pivoting on index ``pivot``.

    With bound pairs ``(A_i, B_i)`` and nonzero weights ``c_i`` the condition is

        ``|c_j| A_j + sum_{i != j} |c_i^2 / c_j| A_i  >  2 sqrt(B_j) sum_{i != j} |c_i| sqrt(B_i)``

    and a holding condition yields the pair

        ``(sum_i |c_i|^2 A_i - 2 sum_{i != j} |c_j c_i| sqrt(B_j B_i),  k sum_i |c_i|^2 B_i)``.

    ``pivot`` is 0-based.
    """
    blist = _coerce_bounds(bounds)
    c = _coerce_coefficients(coefficients)
    k = len(blist)
    if c.shape[0] != k:
        raise ZeroCoefficientError(f"{k} bound pairs but {c.shape[0]} coefficients")
    if not (0 <= pivot < k):
        raise IndexError(f"pivot {pivot} out of range for {k} frames")

    mags = np.abs(c)
    a = np.array([b.lower for b in blist])
    b = np.array([b.upper for b in blist])
    sqrt_b = np.sqrt(b)

    cross = float(np.sum(np.delete(mags * sqrt_b, pivot)))
    lhs = mags[pivot] * a[pivot] + float(np.sum(np.delete(mags**2 * a, pivot))) / mags[pivot]
    rhs = 2.0 * sqrt_b[pivot] * cross
    margin = lhs - rhs

    lower = float(np.sum(mags**2 * a)) - 2.0 * mags[pivot] * sqrt_b[pivot] * cross
    upper = k * float(np.sum(mags**2 * b))
    holds = margin > 0.0 and lower > 0.0
    return PredictedBounds(lower, upper, holds, margin)


def finite_sum_best_pivot(bounds, coefficients) -> tuple[int, PredictedBounds]:
    """The pivot whose holding condition gives the largest predicted lower bound.

    Falls back to the largest-margin pivot when no pivot makes the condition
    hold.
    """
    blist = _coerce_bounds(bounds)
    predictions = [
        finite_sum_predict(blist, coefficients, j) for j in range(len(blist))
    ]
    holding = [(j, p) for j, p in enumerate(predictions) if p.condition_holds]
    if holding:
        return max(holding, key=lambda jp: jp[1].lower)
    return max(enumerate(predictions), key=lambda jp: jp[1].condition_margin)


def dual_sum_predict(bounds1, bounds2) -> PredictedBounds:
    """Predicted bounds ``(A1 + A2 + 2, B1 + B2 + 2)`` for a frame plus a dual.

    No side condition: a verified dual pair always sums to a frame, so the
    margin is the (always positive) predicted lower bound itself.  The caller
    is responsible for verifying duality first.
    """
    b1 = bounds1 if isinstance(bounds1, FrameBounds) else FrameBounds(*bounds1)
    b2 = bounds2 if isinstance(bounds2, FrameBounds) else FrameBounds(*bounds2)
    lower = b1.lower + b2.lower + 2.0
    upper = b1.upper + b2.upper + 2.0
    return PredictedBounds(lower, upper, True, lower)


@dataclass(frozen=True)
class OperatorSumSpec:
    """Two frames with matrices applied vector-wise before summing.

    ``m1``/``m2`` are the adjoint lower bounds and ``norm1``/``norm2`` the
    operator norms; both are recomputed from the matrices (their extreme
    singular values) and any caller-supplied values are cross-checked against
    the recomputation.
    """

    frame1: FiniteFrame
    frame2: FiniteFrame
    theta1: np.ndarray
    theta2: np.ndarray
    m1: float | None = None
    m2: float | None = None
    norm1: float | None = None
    norm2: float | None = None

    def __post_init__(self):
        t1 = linalg.as_cmatrix(self.theta1)
        t2 = linalg.as_cmatrix(self.theta2)
        if self.frame1.dim != self.frame2.dim or self.frame1.count != self.frame2.count:
            raise AlignmentMismatchError(
                f"frames must align: {self.frame1!r} vs {self.frame2!r}"
            )
        d = self.frame1.dim
        for name, t in (("theta1", t1), ("theta2", t2)):
            if t.shape != (d, d):
                raise AlignmentMismatchError(f"{name} must be {d}x{d}, got {t.shape}")
        object.__setattr__(self, "theta1", t1)
        object.__setattr__(self, "theta2", t2)
        for name, t, m, nrm in (
            ("theta1", t1, self.m1, self.norm1),
            ("theta2", t2, self.m2, self.norm2),
        ):
            smin, smax = linalg.extreme_singular_values(t)
            for label, supplied, computed in (
                (f"m of {name}", m, smin),
                (f"norm of {name}", nrm, smax),
            ):
                if supplied is not None and abs(supplied - computed) > OPERATOR_NORM_TOLERANCE * max(
                    1.0, computed
                ):
                    raise InconsistentSpecError(
                        f"{label} supplied as {supplied} but singular values give {computed}"
                    )
            if name == "theta1":
                object.__setattr__(self, "m1", smin)
                object.__setattr__(self, "norm1", smax)
            else:
                object.__setattr__(self, "m2", smin)
                object.__setattr__(self, "norm2", smax)


def operator_sum_predict(spec: OperatorSumSpec, bounds1, bounds2) -> PredictedBounds:
    """Predicted bounds for ``{T1 f_k + T2 g_k}``.

    Condition and lower bound are the same expression,

        ``A1 m1^2 + A2 m2^2 - 2 sqrt(B1 B2) ||T1|| ||T2||``,

    the upper bound is ``(sqrt(B1) ||T1|| + sqrt(B2) ||T2||)^2``.
    """
    b1 = bounds1 if isinstance(bounds1, FrameBounds) else FrameBounds(*bounds1)
    b2 = bounds2 if isinstance(bounds2, FrameBounds) else FrameBounds(*bounds2)
    margin = (
        b1.lower * spec.m1**2
        + b2.lower * spec.m2**2
        - 2.0 * math.sqrt(b1.upper * b2.upper) * spec.norm1 * spec.norm2
    )
    upper = (math.sqrt(b1.upper) * spec.norm1 + math.sqrt(b2.upper) * spec.norm2) ** 2
    return PredictedBounds(margin, upper, margin > 0.0, margin)


@dataclass(frozen=True)
class ScalarEnvelope:
    """Modulus envelope of a scalar sequence aligned with a frame's indexing."""

    inf_abs: float
    sup_abs: float
    sequence: np.ndarray = field(compare=False)

    @classmethod
    def from_sequence(cls, values) -> "ScalarEnvelope":
        seq = np.asarray(values, dtype=complex)
        if seq.ndim != 1 or seq.size == 0:
            raise InvalidBoundsError("scalar sequence must be a nonempty vector")
        if not np.all(np.isfinite(seq.real)) or not np.all(np.isfinite(seq.imag)):
            raise InvalidBoundsError("scalar sequence must be finite")
        mags = np.abs(seq)
        return cls(inf_abs=float(mags.min()), sup_abs=float(mags.max()), sequence=seq)

    def __post_init__(self):
        if not (0.0 <= self.inf_abs <= self.sup_abs):
            raise InvalidBoundsError(
                f"need 0 <= inf <= sup, got ({self.inf_abs}, {self.sup_abs})"
            )


def perturbed_sum_predict(env1: ScalarEnvelope, env2: ScalarEnvelope, bounds1, bounds2) -> PredictedBounds:
    """Predicted bounds for ``{alpha_k f_k + beta_k g_k}``.

    Condition and lower bound:

        ``inf|alpha|^2 A1 + inf|beta|^2 A2 - 2 sup|alpha| sup|beta| sqrt(B1 B2)``,

    upper bound ``(sup|alpha| sqrt(B1) + sup|beta| sqrt(B2))^2``.
    """
    b1 = bounds1 if isinstance(bounds1, FrameBounds) else FrameBounds(*bounds1)
    b2 = bounds2 if isinstance(bounds2, FrameBounds) else FrameBounds(*bounds2)
    margin = (
        env1.inf_abs**2 * b1.lower
        + env2.inf_abs**2 * b2.lower
        - 2.0 * env1.sup_abs * env2.sup_abs * math.sqrt(b1.upper * b2.upper)
    )
    upper = (env1.sup_abs * math.sqrt(b1.upper) + env2.sup_abs * math.sqrt(b2.upper)) ** 2
    return PredictedBounds(margin, upper, margin > 0.0, margin)


@dataclass(frozen=True)
class WeightedSumSpec:
    """Aligned frames plus nonzero weights and a 0-based pivot index."""

    frames: tuple
    coefficients: np.ndarray
    pivot: int

    def __post_init__(self):
        frames = tuple(self.frames)
        if not frames:
            raise AlignmentMismatchError("need at least one frame")
        dim, count = frames[0].dim, frames[0].count
        for fr in frames[1:]:
            if fr.dim != dim or fr.count != count:
                raise AlignmentMismatchError(
                    f"all frames must share dim and count, got {fr!r} vs ({count}, {dim})"
                )
        c = _coerce_coefficients(self.coefficients)
        if c.shape[0] != len(frames):
            raise AlignmentMismatchError(
                f"{len(frames)} frames but {c.shape[0]} coefficients"
            )
        if not (0 <= self.pivot < len(frames)):
            raise IndexError(f"pivot {self.pivot} out of range")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "coefficients", c)


def build_sum_frame(spec: WeightedSumSpec) -> FiniteFrame:
    """Vector-wise weighted sum ``sum_i c_i f_k^(i)``."""
    stacked = np.stack([fr.vectors for fr in spec.frames])
    summed = np.tensordot(spec.coefficients, stacked, axes=(0, 0))
    return FiniteFrame(summed)


def build_operator_sum_frame(spec: OperatorSumSpec) -> FiniteFrame:
    """Vector-wise ``T1 f_k + T2 g_k``."""
    v1 = spec.frame1.vectors @ spec.theta1.T
    v2 = spec.frame2.vectors @ spec.theta2.T
    return FiniteFrame(v1 + v2)


def build_perturbed_sum_frame(
    env1: ScalarEnvelope, env2: ScalarEnvelope, frame1: FiniteFrame, frame2: FiniteFrame
) -> FiniteFrame:
    """Vector-wise ``alpha_k f_k + beta_k g_k`` using the envelopes' sequences."""
    if frame1.dim != frame2.dim or frame1.count != frame2.count:
        raise AlignmentMismatchError(f"frames must align: {frame1!r} vs {frame2!r}")
    if env1.sequence.shape[0] != frame1.count or env2.sequence.shape[0] != frame2.count:
        raise AlignmentMismatchError(
            "scalar sequences must have one entry per frame vector"
        )
    summed = env1.sequence[:, None] * frame1.vectors + env2.sequence[:, None] * frame2.vectors
    return FiniteFrame(summed)


@dataclass(frozen=True)
class CertificationReport:
    """Outcome of checking a prediction against the spectral oracle.

    ``certified`` means the predicted pair brackets the oracle pair within
    ``CERTIFY_TOLERANCE`` (relative): ``lower <= A*`` and ``upper >= B*``.
    Slacks are ``A* - lower`` and ``upper - B*``.
    """

    predicted: PredictedBounds
    exact: FrameBounds
    certified: bool
    lower_slack: float
    upper_slack: float
    predicted_width: float
    exact_width: float
    notes: tuple = ()

    def with_notes(self, notes) -> "CertificationReport":
        return replace(self, notes=tuple(notes))


def certify(predicted: PredictedBounds, actual: FiniteFrame) -> CertificationReport:
    """Check that ``predicted`` brackets the oracle bounds of ``actual``.

    Requires a holding condition.  Propagates :class:`NotAFrameError` when the
    built family fails to span, which callers should surface as a finding
    rather than crash on: a holding condition with a non-spanning sum exposes
    either an invalid input bound or a genuine defect.
    """
    if not predicted.condition_holds:
        raise InvalidBoundsError("cannot certify a prediction whose condition failed")
    cert = exact_bounds(actual)
    lo_star, hi_star = cert.bounds.lower, cert.bounds.upper
    ok = (
        predicted.lower <= lo_star * (1.0 + CERTIFY_TOLERANCE)
        and predicted.upper >= hi_star * (1.0 - CERTIFY_TOLERANCE)
    )
    return CertificationReport(
        predicted=predicted,
        exact=cert.bounds,
        certified=ok,
        lower_slack=lo_star - predicted.lower,
        upper_slack=predicted.upper - hi_star,
        predicted_width=predicted.width,
        exact_width=cert.width,
    )
