"""Dense complex linear algebra kernel.

Everything downstream (frame bounds, canonical duals, operator norms) reduces
to the Hermitian eigenproblem solved here.  The solver is a cyclic complex
Jacobi iteration: it is self-contained, has no convergence trouble on the
Hermitian matrices this toolkit produces, and stays accurate to a few ulp at
the sizes we care about (dimension up to a few hundred; beyond that it works
but is not tuned).

Conventions
-----------
* matrices are dense ``complex128`` arrays, row-major;
* eigenvalues are returned ascending, eigenvectors as matching columns;
* singular values come from the eigenvalues of ``M* M`` so the whole module
  rests on one kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    NoConvergenceError,
    NotHermitianError,
    SingularOperatorError,
)

#: relative max-norm asymmetry tolerated before a matrix is rejected as
#: non-Hermitian.
HERMITIAN_TOLERANCE = 1e-10

#: sweep convergence: off-diagonal Frobenius mass below this times ||M||_F.
JACOBI_OFF_TOLERANCE = 1e-14

#: hard cap on cyclic sweeps before giving up.
JACOBI_MAX_SWEEPS = 100

#: relative spectral floor: eigenvalues below RANK_TOLERANCE * lambda_max are
#: treated as zero by the positive-definite solver.
RANK_TOLERANCE = 1e-12


def as_cvector(values) -> np.ndarray:
    """Coerce to a finite 1-d complex vector."""
    arr = np.asarray(values, dtype=complex)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionMismatchError(f"expected a nonempty vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise DimensionMismatchError("vector entries must be finite")
    return arr


def as_cmatrix(values) -> np.ndarray:
    """Coerce to a finite 2-d complex matrix."""
    arr = np.asarray(values, dtype=complex)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionMismatchError(f"expected a nonempty matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise DimensionMismatchError("matrix entries must be finite")
    return arr


@dataclass(frozen=True)
class EigenResult:
    """Eigendecomposition ``M = Q diag(eigenvalues) Q*``.

    ``eigenvalues`` is a real ascending array, ``eigenvectors`` holds the
    matching orthonormal columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def hermitian_eig(matrix) -> EigenResult:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Raises :class:`NotHermitianError` if the input is asymmetric beyond
    ``HERMITIAN_TOLERANCE`` (relative to the largest entry) and
    :class:`NoConvergenceError` if ``JACOBI_MAX_SWEEPS`` sweeps do not push the
    off-diagonal mass below ``JACOBI_OFF_TOLERANCE * ||M||_F``.
    """
    a = as_cmatrix(matrix)
    n, m = a.shape
    if n != m:
        raise DimensionMismatchError(f"matrix must be square, got {n}x{m}")

    scale = float(np.max(np.abs(a)))
    asym = float(np.max(np.abs(a - a.conj().T)))
    if scale > 0.0 and asym > HERMITIAN_TOLERANCE * scale:
        raise NotHermitianError(
            f"asymmetry {asym:.3e} exceeds {HERMITIAN_TOLERANCE:.0e} * max entry {scale:.3e}"
        )

    # Work on the Hermitian average so round-off in the input cannot drift.
    a = (a + a.conj().T) / 2.0
    q = np.eye(n, dtype=complex)
    fro = float(np.linalg.norm(a))
    if fro == 0.0:
        return EigenResult(np.zeros(n), q)

    # Rotations with pivots this small cannot move the off-diagonal mass
    # anywhere near the convergence threshold; skip them.
    skip = JACOBI_OFF_TOLERANCE * fro / (10.0 * n)

    converged = False
    for _ in range(JACOBI_MAX_SWEEPS):
        if _off_diagonal_norm(a) <= JACOBI_OFF_TOLERANCE * fro:
            converged = True
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                pivot = a[p, r]
                abs_pivot = abs(pivot)
                if abs_pivot <= skip:
                    continue
                app = a[p, p].real
                arr = a[r, r].real
                phase = pivot / abs_pivot
                tau = (app - arr) / (2.0 * abs_pivot)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # Unitary plane rotation U: U[p,p]=U[r,r]=c, U[p,r]=-s*phase,
                # U[r,p]=s*conj(phase); apply A <- U* A U, accumulate Q <- Q U.
                col_p = a[:, p].copy()
                col_r = a[:, r].copy()
                a[:, p] = c * col_p + s * np.conj(phase) * col_r
                a[:, r] = -s * phase * col_p + c * col_r
                row_p = a[p, :].copy()
                row_r = a[r, :].copy()
                a[p, :] = c * row_p + s * phase * row_r
                a[r, :] = -s * np.conj(phase) * row_p + c * row_r
                a[p, r] = 0.0
                a[r, p] = 0.0
                q_p = q[:, p].copy()
                q_r = q[:, r].copy()
                q[:, p] = c * q_p + s * np.conj(phase) * q_r
                q[:, r] = -s * phase * q_p + c * q_r
    else:
        converged = _off_diagonal_norm(a) <= JACOBI_OFF_TOLERANCE * fro
    if not converged:
        raise NoConvergenceError(f"Jacobi sweep limit {JACOBI_MAX_SWEEPS} exceeded")

    eigenvalues = np.diag(a).real.copy()
    order = np.argsort(eigenvalues, kind="stable")
    return EigenResult(eigenvalues[order], q[:, order])


def extreme_singular_values(matrix) -> tuple[float, float]:
    """Smallest and largest singular value ``(sigma_min, sigma_max)``.

    Computed as square roots of the extreme eigenvalues of ``M* M``; tiny
    negative round-off eigenvalues are clamped to zero.
    """
    m = as_cmatrix(matrix)
    gram = m.conj().T @ m
    eig = hermitian_eig(gram)
    lo = max(float(eig.eigenvalues[0]), 0.0)
    hi = max(float(eig.eigenvalues[-1]), 0.0)
    return math.sqrt(lo), math.sqrt(hi)


def solve_hpd(matrix, rhs) -> np.ndarray:
    """Solve ``M x = b`` for Hermitian positive definite ``M``.

    Uses the eigendecomposition, so accuracy matches :func:`hermitian_eig`.
    Raises :class:`SingularOperatorError` when the smallest eigenvalue sits at
    or below ``RANK_TOLERANCE`` times the largest.
    """
    m = as_cmatrix(matrix)
    b = as_cvector(rhs)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"matrix must be square, got {m.shape}")
    if m.shape[0] != b.shape[0]:
        raise DimensionMismatchError(
            f"matrix is {m.shape[0]}x{m.shape[1]} but right-hand side has length {b.shape[0]}"
        )
    eig = hermitian_eig(m)
    lam = eig.eigenvalues
    if lam[0] <= RANK_TOLERANCE * max(lam[-1], 0.0) or lam[-1] <= 0.0:
        raise SingularOperatorError(
            f"smallest eigenvalue {lam[0]:.3e} is below the rank floor of "
            f"{RANK_TOLERANCE:.0e} * {lam[-1]:.3e}"
        )
    qs = eig.eigenvectors
    return qs @ ((qs.conj().T @ b) / lam)


def hpd_inverse_apply(matrix, vectors) -> np.ndarray:
    """Apply ``M^-1`` to each row of ``vectors`` (one factorization, many solves)."""
    m = as_cmatrix(matrix)
    rows = as_cmatrix(vectors)
    if rows.shape[1] != m.shape[0]:
        raise DimensionMismatchError(
            f"rows have length {rows.shape[1]}, matrix is {m.shape[0]}x{m.shape[1]}"
        )
    eig = hermitian_eig(m)
    lam = eig.eigenvalues
    if lam[0] <= RANK_TOLERANCE * max(lam[-1], 0.0) or lam[-1] <= 0.0:
        raise SingularOperatorError(
            f"smallest eigenvalue {lam[0]:.3e} is below the rank floor of "
            f"{RANK_TOLERANCE:.0e} * {lam[-1]:.3e}"
        )
    qs = eig.eigenvectors
    return ((rows @ qs.conj()) / lam) @ qs.T
