"""Exact decomposition of a noiseless superposition of geometric sequences.

Phase 1 finds the number of components as the smallest order whose basic
simplex volumes form a nonzero geometric sequence.  Phase 2 reads the
common ratios off the roots of the polynomial whose coefficients are the
volume quotients, then fits the initial terms by least squares.
"""
from __future__ import annotations

import warnings
from typing import Callable, Optional

import numpy as np

from .errors import DetectionError, InconsistencyError, InsufficientSamplesError
from .linalg import least_squares, polynomial_roots
from .sequence import Decomposition, IndexPattern, as_sequence, synthesize
from .simplex import (
    basic_simplexes,
    basic_volume_series,
    is_degenerate,
    is_geometric,
    max_vertices,
    volume_quotients,
)

#: Relative agreement required between consecutive volume ratios.
DETECT_TOL = 1e-7
DUPLICATE_ROOT_RTOL = 1e-6
ROUNDTRIP_RTOL = 1e-4

PatternFactory = Callable[[int], IndexPattern]


class DegeneracyWarning(UserWarning):
    """Recovered ratios are (nearly) repeated; initial terms are unreliable."""


def default_k_max(length: int) -> int:
    return max((length - 1) // 2, 1)


def check_condition1(length: int, pattern: IndexPattern, k_hat: Optional[int] = None) -> bool:
    """True when ``length`` samples give a search space of more than k_hat+1 vertices."""
    k_hat = pattern.k_hat if k_hat is None else k_hat
    if k_hat != pattern.k_hat:
        raise ValueError(f"pattern has {pattern.k_hat} offsets, k_hat={k_hat}")
    return pattern.i_c * (k_hat + 1) + pattern.phi[-1] <= length - 1


def check_condition2(length: int, pattern: IndexPattern) -> bool:
    """True when the stride-1 search space holds more than k vertices."""
    return max_vertices(length, IndexPattern(1, pattern.phi)) >= pattern.k_hat + 1


def detect_k(
    s,
    patterns: Optional[PatternFactory] = None,
    tol: float = DETECT_TOL,
    k_max: Optional[int] = None,
) -> int:
    """Smallest order whose basic volume series is a nonzero geometric sequence.

    ``patterns`` maps a candidate order to the index pattern used for it;
    the default is ``i_c = 1, phi = (0, ..., k_hat-1)``.  At most
    ``k_hat + 3`` volumes are tested per order.
    """
    s = as_sequence(s)
    if s.size < 3:
        raise InsufficientSamplesError(2, s.size)
    patterns = patterns or IndexPattern.consecutive
    k_max = default_k_max(s.size) if k_max is None else k_max
    for k_hat in range(1, k_max + 1):
        pattern = patterns(k_hat)
        if not check_condition1(s.size, pattern):
            break
        n_vertices = min(max_vertices(s.size, pattern), 2 * k_hat + 2)
        if np.any(is_degenerate(basic_simplexes(s, pattern, n_vertices))):
            continue
        ok, _ = is_geometric(basic_volume_series(s, pattern, n_vertices), tol)
        if ok:
            return k_hat
    raise DetectionError(
        f"no order up to {k_max} gives a geometric volume series "
        "(noisy input, repeated ratios, or too few samples)"
    )


def extract_ratios(v) -> np.ndarray:
    """Roots of ``sum_n (-1)**(k-n) v[k-n] r**n``; ``v[0]`` must be 1."""
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or v.size < 2:
        raise ValueError("need a quotient vector of length >= 2")
    signs = (-1.0) ** np.arange(v.size)
    roots = polynomial_roots(signs * v)
    if roots.size > 1:
        gaps = np.abs(roots[:, None] - roots[None, :])
        np.fill_diagonal(gaps, np.inf)
        scale = np.maximum(np.abs(roots).max(), 1e-300)
        if gaps.min() < DUPLICATE_ROOT_RTOL * scale:
            warnings.warn(
                f"near-duplicate common ratios (gap {gaps.min():.3g})",
                DegeneracyWarning,
                stacklevel=2,
            )
    return roots


def vandermonde(r, length: int) -> np.ndarray:
    """``R[m, n] = r[n] ** m`` for ``m < length``."""
    r = np.asarray(r, dtype=complex)
    return r[None, :] ** np.arange(length)[:, None]


def extract_initial_terms(s, r) -> np.ndarray:
    """Least-squares initial terms for known ratios."""
    s = as_sequence(s)
    r = np.atleast_1d(np.asarray(r, dtype=complex))
    if s.size < r.size:
        raise InsufficientSamplesError(r.size - 1, s.size)
    R = vandermonde(r, s.size)
    cond = np.linalg.cond(R)
    if not np.isfinite(cond) or cond > 1e12:
        warnings.warn(
            f"ill-conditioned ratio matrix (cond {cond:.3g})",
            DegeneracyWarning,
            stacklevel=2,
        )
    return least_squares(R, s)


def roundtrip_error(s, d: Decomposition) -> float:
    """Largest sample deviation of ``synthesize(d)`` relative to ``max|s|``."""
    s = np.asarray(s, dtype=complex)
    scale = np.abs(s).max()
    diff = np.abs(synthesize(d, s.size) - s).max()
    return float(diff / scale) if scale > 0 else float(diff)


def extract_components(s, k: int, pattern: Optional[IndexPattern] = None, j: int = 0) -> Decomposition:
    """Phase 2 alone: quotients, ratios and initial terms for a known order."""
    s = as_sequence(s)
    pattern = pattern or IndexPattern.consecutive(k)
    if pattern.k_hat != k:
        raise ValueError(f"pattern has {pattern.k_hat} offsets, expected {k}")
    if not check_condition2(s.size - j, pattern):
        raise InsufficientSamplesError(pattern.phi[-1] + k + j, s.size)
    v = volume_quotients(s, IndexPattern(1, pattern.phi), j)
    r = extract_ratios(v)
    a = extract_initial_terms(s, r)
    return Decomposition.from_arrays(a, r, validate=False)


def decompose(
    s,
    pattern: Optional[IndexPattern] = None,
    j: int = 0,
    tol: float = DETECT_TOL,
    k_max: Optional[int] = None,
    k: Optional[int] = None,
) -> Decomposition:
    """Full noiseless decomposition; the inverse of :func:`synthesize`.

    ``k`` skips detection.  ``pattern`` (stride ignored) picks the sample
    offsets used for the quotients.  Raises :class:`InconsistencyError`
    when the result does not reproduce ``s``.
    """
    s = as_sequence(s)
    if k is None:
        k = detect_k(s, tol=tol, k_max=k_max)
    d = extract_components(s, k, pattern, j)
    err = roundtrip_error(s, d)
    if not err <= ROUNDTRIP_RTOL:
        raise InconsistencyError(f"round-trip residual {err:.3g} exceeds {ROUNDTRIP_RTOL}")
    return d
