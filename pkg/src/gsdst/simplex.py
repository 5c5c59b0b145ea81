"""The k-simplexes transform.

A sequence is lifted into a k-dimensional space by reading k samples at
offsets ``phi`` (one vertex), then shifting all offsets by ``i_c`` to spawn
the next vertex.  Simplexes spanned by the origin and k consecutive
vertices have signed volume ``det / k!``; their volumes and volume
quotients carry the number of components and the common ratios.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DegenerateSimplexError, InsufficientSamplesError
from .linalg import log_determinant
from .sequence import IndexPattern, as_sequence

#: A simplex is degenerate when its vertex matrix, rows scaled to unit
#: max-magnitude and columns to unit norm, has |det| below this.
DEGENERATE_RTOL = 1e-14
GEOMETRIC_TOL = 1e-9


@dataclass(frozen=True)
class SearchSpace:
    pattern: IndexPattern
    vertices: np.ndarray  # (count, k_hat); row j is vertex j

    @property
    def cardinality(self) -> int:
        return self.vertices.shape[0]


def max_vertices(length: int, pattern: IndexPattern) -> int:
    """Largest search-space cardinality a sequence of ``length`` supports."""
    span = length - 1 - pattern.phi[-1]
    return span // pattern.i_c + 1 if span >= 0 else 0


def _vertex_indices(pattern: IndexPattern, count: int) -> np.ndarray:
    return pattern.i_c * np.arange(count)[:, None] + np.asarray(pattern.phi)[None, :]


def build_search_space(s, pattern: IndexPattern, count: int | None = None) -> SearchSpace:
    """Vertices ``(s[i_c*j + phi[0]], ..., s[i_c*j + phi[-1]])`` for j < count."""
    s = as_sequence(s)
    if count is None:
        count = max_vertices(s.size, pattern)
    if count < 1:
        raise InsufficientSamplesError(pattern.phi[-1], s.size)
    largest = pattern.i_c * (count - 1) + pattern.phi[-1]
    if largest > s.size - 1:
        raise InsufficientSamplesError(largest, s.size)
    idx = _vertex_indices(pattern, count)
    return SearchSpace(pattern, s[idx])


def equilibrated_log_det(mats) -> np.ndarray:
    """``log|det|`` after scaling rows to unit max and columns to unit norm.

    Invariant to row and column scaling, so it separates rank-deficient
    vertex sets from ones that are merely badly scaled by geometric growth.
    """
    a = np.asarray(mats, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = a / np.abs(a).max(axis=-1, keepdims=True)
        a = a / np.linalg.norm(a, axis=-2, keepdims=True)
        a = np.where(np.isfinite(a), a, 0.0)
    return log_determinant(a)[1]


def is_degenerate(mats) -> np.ndarray:
    """Flag numerically singular simplexes in a stack of vertex matrices."""
    return equilibrated_log_det(mats) < math.log(DEGENERATE_RTOL)


def _signed_volumes(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Phase and log-magnitude of ``det/k!`` over a stack of k x k matrices."""
    k = mats.shape[-1]
    phase, logabs = log_determinant(mats)
    return phase, logabs - math.lgamma(k + 1)


def _to_complex(phase, logabs):
    with np.errstate(under="ignore"):
        return phase * np.exp(logabs)


def basic_simplexes(s, pattern: IndexPattern, count: int | None = None) -> np.ndarray:
    """Stack of vertex matrices; entry j has vertices ``j .. j+k_hat-1`` as columns."""
    space = build_search_space(s, pattern, count)
    k = pattern.k_hat
    n_vol = space.cardinality - k + 1
    if n_vol < 1:
        return np.zeros((0, k, k), dtype=complex)
    cols = np.arange(n_vol)[:, None] + np.arange(k)[None, :]
    return np.swapaxes(space.vertices[cols], 1, 2)


def basic_volume_series(s, pattern: IndexPattern, count: int | None = None) -> np.ndarray:
    """Volumes of the simplexes on vertices ``j .. j+k_hat-1`` of the search space.

    Returns an empty array when the search space holds fewer than ``k_hat``
    vertices.
    """
    omega = basic_simplexes(s, pattern, count)
    if omega.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    return _to_complex(*_signed_volumes(omega))


def is_geometric(v, tol: float = GEOMETRIC_TOL, zero_threshold: float = 0.0):
    """Check whether ``v`` is a nonzero geometric sequence.

    All consecutive ratios must agree pairwise within relative tolerance
    ``tol``.  Returns ``(True, mean_ratio)`` or ``(False, None)``.
    """
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or v.size < 3:
        raise ValueError("need at least three terms to test for a geometric sequence")
    if np.any(np.abs(v) <= zero_threshold) or np.any(v == 0):
        return False, None
    q = v[1:] / v[:-1]
    diff = np.abs(q[:, None] - q[None, :])
    scale = np.maximum(np.abs(q[:, None]), np.abs(q[None, :]))
    if np.all(diff <= tol * scale):
        return True, complex(q.mean())
    return False, None


def union_polyhedron(s, pattern: IndexPattern, j: int = 0) -> np.ndarray:
    """The k x (k+1) matrix whose columns are vertices ``j .. j+k``.

    With ``i_c > 1`` the vertices are taken from the strided search space,
    and the resulting quotients are symmetric functions of ``r**i_c``.
    """
    k = pattern.k_hat
    space = build_search_space(s, pattern, j + k + 1)
    return space.vertices[j:j + k + 1].T.copy()


def _subset_columns(k: int) -> np.ndarray:
    # Lexicographic order of retained column sets; subset 0 keeps 0..k-1.
    return np.array(list(combinations(range(k + 1), k)))


def volume_quotients(s, pattern: IndexPattern, j: int = 0) -> np.ndarray:
    """Volume quotients of the k+1 combinatorial simplexes of union polyhedron j.

    ``v[l] = vol(subset l) / vol(subset 0)``; for a noiseless k-component
    sequence this equals ``(1, e_1(r), ..., e_k(r))``.
    """
    omega = union_polyhedron(s, pattern, j)
    k = pattern.k_hat
    subsets = omega[:, _subset_columns(k)].transpose(1, 0, 2)  # (k+1, k, k)
    phase, logabs = _signed_volumes(subsets)
    if phase[0] == 0 or is_degenerate(subsets[0]):
        raise DegenerateSimplexError(
            f"reference simplex volume is numerically zero for k={k}; "
            "k may be overestimated or ratios duplicated"
        )
    v = _to_complex(phase / phase[0], logabs - logabs[0])
    v[0] = 1.0
    return v


def candidate_quotients(s, k_hat: int, i_c: int, phis: np.ndarray):
    """Vectorized :func:`volume_quotients` over many offset sets (j = 0).

    ``phis`` is an ``(N, k_hat)`` integer array.  Returns ``(v, ok)`` where
    ``v`` has shape ``(N, k_hat+1)`` and ``ok`` flags candidates whose
    reference volume is above the zero threshold.
    """
    s = as_sequence(s)
    phis = np.asarray(phis, dtype=int).reshape(-1, k_hat)
    # omega[n, m, c] = s[phi[n, m] + i_c * c]
    idx = phis[:, :, None] + i_c * np.arange(k_hat + 1)[None, None, :]
    omega = s[idx]
    cols = _subset_columns(k_hat)
    subsets = omega[:, :, cols].transpose(0, 2, 1, 3)  # (N, k+1, k, k)
    phase, logabs = _signed_volumes(subsets)
    ok = (phase[:, 0] != 0) & ~is_degenerate(subsets[:, 0])
    v = np.zeros((phis.shape[0], k_hat + 1), dtype=complex)
    if ok.any():
        ph, la = phase[ok], logabs[ok]
        with np.errstate(over="ignore", invalid="ignore"):
            v[ok] = _to_complex(ph / ph[:, :1], la - la[:, :1])
        v[ok, 0] = 1.0
    return v, ok & np.all(np.isfinite(v), axis=1)
