"""Geometric components, their superposition, and index patterns."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DimensionError, InvalidDecompositionError

#: Minimum |r_i - r_j| for two ratios to count as distinct.
DISTINCT_TOL = 1e-9

# A ComplexSequence is a 1-D complex ndarray; as_sequence validates one.
ComplexSequence = np.ndarray


def as_sequence(samples) -> np.ndarray:
    """Return a read-only, finite, non-empty 1-D complex array."""
    arr = np.array(samples, dtype=complex)
    if arr.ndim != 1 or arr.size < 1:
        raise DimensionError(f"expected a non-empty 1-D sequence, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sequence has non-finite samples")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GeometricComponent:
    """One geometric sequence ``a * r**l``."""

    a: complex
    r: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "r", complex(self.r))

    def samples(self, length: int) -> np.ndarray:
        return self.a * self.r ** np.arange(length)


@dataclass(frozen=True)
class Decomposition:
    """An unordered set of geometric components.

    Construction only checks that the components are finite and that there
    is at least one; call :meth:`validate` for the identifiability
    constraints (nonzero terms, distinct ratios).
    """

    components: tuple[GeometricComponent, ...]

    def __post_init__(self):
        comps = tuple(
            c if isinstance(c, GeometricComponent) else GeometricComponent(*c)
            for c in self.components
        )
        if not comps:
            raise InvalidDecompositionError("a decomposition needs at least one component")
        for c in comps:
            if not (np.isfinite(c.a) and np.isfinite(c.r)):
                raise InvalidDecompositionError(f"non-finite component {c}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_arrays(cls, a: Iterable, r: Iterable, validate: bool = True) -> "Decomposition":
        a = np.atleast_1d(np.asarray(a, dtype=complex))
        r = np.atleast_1d(np.asarray(r, dtype=complex))
        if a.shape != r.shape:
            raise DimensionError(f"{a.size} initial terms but {r.size} ratios")
        d = cls(tuple(GeometricComponent(ai, ri) for ai, ri in zip(a, r)))
        if validate:
            d.validate()
        return d

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def initial_terms(self) -> np.ndarray:
        return np.array([c.a for c in self.components], dtype=complex)

    @property
    def ratios(self) -> np.ndarray:
        return np.array([c.r for c in self.components], dtype=complex)

    def validate(self, tol: float = DISTINCT_TOL) -> "Decomposition":
        a, r = self.initial_terms, self.ratios
        if np.any(a == 0):
            raise InvalidDecompositionError("initial terms must be nonzero")
        if np.any(r == 0):
            raise InvalidDecompositionError("common ratios must be nonzero")
        gaps = np.abs(r[:, None] - r[None, :])
        np.fill_diagonal(gaps, np.inf)
        if self.k > 1 and gaps.min() <= tol:
            raise InvalidDecompositionError(
                f"common ratios must be pairwise distinct (closest gap {gaps.min():.3g})"
            )
        return self

    def __len__(self) -> int:
        return self.k


@dataclass(frozen=True)
class IndexPattern:
    """Shift stride ``i_c`` and strictly increasing sample offsets ``phi``."""

    i_c: int
    phi: tuple[int, ...]

    def __post_init__(self):
        phi = tuple(int(p) for p in self.phi)
        if not phi:
            raise ValueError("phi must hold at least one index")
        if phi[0] < 0 or any(b <= a for a, b in zip(phi, phi[1:])):
            raise ValueError(f"phi must be strictly increasing and nonnegative: {phi}")
        if int(self.i_c) < 1:
            raise ValueError(f"i_c must be >= 1, got {self.i_c}")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "i_c", int(self.i_c))

    @classmethod
    def consecutive(cls, k_hat: int, i_c: int = 1) -> "IndexPattern":
        return cls(i_c, tuple(range(k_hat)))

    @property
    def k_hat(self) -> int:
        return len(self.phi)


def synthesize(d: Decomposition, length: int) -> np.ndarray:
    """Samples ``sum_n a_n r_n**l`` for ``l = 0 .. length-1``."""
    if length < 1:
        raise ValueError("length must be >= 1")
    powers = d.ratios[None, :] ** np.arange(length)[:, None]
    return as_sequence(powers @ d.initial_terms)


def nmse(reference, estimate) -> float:
    """``||estimate - reference||^2 / ||reference||^2``."""
    ref = np.asarray(reference, dtype=complex)
    est = np.asarray(estimate, dtype=complex)
    if ref.shape != est.shape:
        raise DimensionError(f"length mismatch {ref.shape} vs {est.shape}")
    denom = np.vdot(ref, ref).real
    if denom == 0:
        raise ValueError("reference sequence has zero energy")
    diff = est - ref
    return float(np.vdot(diff, diff).real / denom)


@dataclass(frozen=True)
class ComponentMatch:
    pairs: tuple[tuple[int, int], ...]  # (truth index, estimate index)
    a_error: float
    r_error: float


def match_components(truth: Decomposition, estimate: Decomposition) -> ComponentMatch:
    """Greedily pair components by closest ratio and report relative errors."""
    if truth.k != estimate.k:
        raise DimensionError(f"k mismatch: {truth.k} vs {estimate.k}")
    rt, re_ = truth.ratios, estimate.ratios
    cost = np.abs(rt[:, None] - re_[None, :])
    pairs = []
    free_t, free_e = set(range(truth.k)), set(range(estimate.k))
    for flat in np.argsort(cost, axis=None, kind="stable"):
        i, j = divmod(int(flat), estimate.k)
        if i in free_t and j in free_e:
            pairs.append((i, j))
            free_t.discard(i)
            free_e.discard(j)
    pairs.sort()
    at, ae = truth.initial_terms, estimate.initial_terms
    a_err = max(abs(ae[j] - at[i]) / abs(at[i]) for i, j in pairs)
    r_err = max(abs(re_[j] - rt[i]) / abs(rt[i]) for i, j in pairs)
    return ComponentMatch(tuple(pairs), float(a_err), float(r_err))

