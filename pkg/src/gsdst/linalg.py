"""Dense complex linear-algebra kernels.

Matrices are plain 2-D complex numpy arrays; every function returns a new
array and never mutates its inputs.  Determinants are tracked as
``phase * exp(logabs)`` because the sample matrices used downstream grow
geometrically with the sample index.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionError

#: Singular values below ``PINV_RCOND * sigma_max`` are dropped by the
#: pseudo-inverse.
PINV_RCOND = 1e-12
NEWTON_STEPS = 3


def as_matrix(m) -> np.ndarray:
    """Validate ``m`` as a finite, non-empty 2-D complex matrix."""
    arr = np.array(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def _check_square(arr: np.ndarray) -> None:
    if arr.ndim < 2 or arr.shape[-1] != arr.shape[-2] or arr.shape[-1] < 1:
        raise DimensionError(f"expected square matrices, got shape {arr.shape}")


def log_determinant(m) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(phase, logabs)`` with ``det(m) = phase * exp(logabs)``.

    Accepts a single square matrix or a stack ``(..., n, n)``.  A singular
    matrix yields ``phase == 0`` and ``logabs == -inf``.
    """
    arr = np.asarray(m, dtype=complex)
    _check_square(arr)
    # LAPACK getrf: LU with partial pivoting, log|pivot| accumulated.
    return np.linalg.slogdet(arr)


def determinant(m) -> complex | np.ndarray:
    """Determinant of a square matrix (or a stack of them)."""
    phase, logabs = log_determinant(m)
    with np.errstate(under="ignore"):
        value = phase * np.exp(logabs)
    if np.ndim(value) == 0:
        return complex(value)
    return value


def svd(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD ``m = U @ diag(s) @ V.conj().T`` with ``s`` descending."""
    arr = as_matrix(m)
    u, s, vh = np.linalg.svd(arr, full_matrices=False)
    return u, s, vh.conj().T


def rank_truncate(m, k: int) -> np.ndarray:
    """Best rank-``k`` approximation of ``m`` in the Frobenius norm."""
    arr = as_matrix(m)
    if not 1 <= k <= min(arr.shape):
        raise DimensionError(f"rank {k} outside [1, {min(arr.shape)}]")
    u, s, v = svd(arr)
    return (u[:, :k] * s[:k]) @ v[:, :k].conj().T


def pseudo_inverse(a, rcond: float = PINV_RCOND) -> np.ndarray:
    arr = as_matrix(a)
    u, s, v = svd(arr)
    keep = s > rcond * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    inv_s = np.zeros_like(s)
    inv_s[keep] = 1.0 / s[keep]
    return (v * inv_s) @ u.conj().T


def least_squares(a, b, rcond: float = PINV_RCOND) -> np.ndarray:
    """Minimum-norm least-squares solution of ``a @ x = b``."""
    arr = as_matrix(a)
    rhs = np.asarray(b, dtype=complex)
    if rhs.ndim != 1 or rhs.shape[0] != arr.shape[0]:
        raise DimensionError(
            f"right-hand side of length {rhs.shape} does not match {arr.shape[0]} rows"
        )
    if arr.shape[0] < arr.shape[1]:
        raise DimensionError("least_squares needs rows >= cols")
    return pseudo_inverse(arr, rcond) @ rhs


def companion_matrix(coefficients) -> np.ndarray:
    c = np.asarray(coefficients, dtype=complex)
    n = c.size - 1
    monic = c[1:] / c[0]
    comp = np.zeros((n, n), dtype=complex)
    comp[0, :] = -monic
    comp[np.arange(1, n), np.arange(n - 1)] = 1.0
    return comp


def _horner(c: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = np.full_like(x, c[0])
    dp = np.zeros_like(x)
    for coef in c[1:]:
        dp = dp * x + p
        p = p * x + coef
    return p, dp


def polynomial_roots(coefficients) -> np.ndarray:
    """All roots of a polynomial given highest-degree coefficient first.

    Companion-matrix eigenvalues polished by a few Newton steps; a Newton
    step is only kept when it lowers ``|p(x)|``.
    """
    c = np.asarray(coefficients, dtype=complex)
    if c.ndim != 1 or c.size < 2:
        raise ValueError("polynomial must have degree >= 1")
    if c[0] == 0:
        raise ValueError("leading coefficient is zero")
    if not np.all(np.isfinite(c)):
        raise ValueError("coefficients must be finite")
    roots = np.linalg.eigvals(companion_matrix(c))
    for _ in range(NEWTON_STEPS):
        p, dp = _horner(c, roots)
        ok = dp != 0
        step = np.zeros_like(roots)
        step[ok] = p[ok] / dp[ok]
        trial = roots - step
        better = np.abs(_horner(c, trial)[0]) < np.abs(p)
        roots = np.where(better, trial, roots)
    return roots
