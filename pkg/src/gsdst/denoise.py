"""Decomposition of noisy samples.

Model order is chosen by how consistent the volume quotients are across
many index patterns (they coincide exactly only at the true order for
noiseless data).  The samples are then cleaned by alternating between
rank-k truncation and Hankel structure before the exact extraction runs.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import DimensionError, InfeasibleError
from .gsd import default_k_max, extract_components
from .linalg import rank_truncate
from .sequence import Decomposition, IndexPattern, as_sequence
from .simplex import candidate_quotients, volume_quotients

#: Distance pairs evaluated per order before candidates are subsampled.
DEFAULT_PAIR_BUDGET = 20_000
DIAGONAL_PAIR_BUDGET = 2_000
_DIST_FLOOR = 1e-300

Seed = Union[None, int, np.random.SeedSequence]


@dataclass(frozen=True)
class DenoiseConfig:
    epsilon: float = 1e-10
    i_max: int = 30

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.i_max < 1:
            raise ValueError("i_max must be >= 1")


class SimilarityKind(enum.Enum):
    FULL = "full"
    DIAGONAL = "diag"
    RAPID = "rapid"

    @property
    def default_pair_budget(self) -> int:
        return DIAGONAL_PAIR_BUDGET if self is SimilarityKind.DIAGONAL else DEFAULT_PAIR_BUDGET


@dataclass(frozen=True)
class DenoiseResult:
    sequence: np.ndarray
    iterations: int
    converged: bool
    residuals: tuple[float, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class NoisyDecomposition:
    decomposition: Decomposition
    k: int
    denoised: np.ndarray
    iterations: int
    converged: bool


# -- Hankel structure ---------------------------------------------------------

def hankel_rows(length: int) -> int:
    return (length + 1) // 2


def hankelize(s) -> np.ndarray:
    """``Q[m, n] = s[m + n]`` with ``floor((P+1)/2)`` rows."""
    s = as_sequence(s)
    if s.size < 2:
        raise DimensionError("need at least two samples to hankelize")
    rows = hankel_rows(s.size)
    cols = s.size - rows + 1
    return s[np.arange(rows)[:, None] + np.arange(cols)[None, :]]


def dehankelize(q) -> np.ndarray:
    """Average each anti-diagonal of ``q`` back into one sample."""
    q = np.asarray(q, dtype=complex)
    rows, cols = q.shape
    idx = (np.arange(rows)[:, None] + np.arange(cols)[None, :]).ravel()
    length = rows + cols - 1
    # average deviations from each diagonal's first entry so constant
    # anti-diagonals come back bit-for-bit
    first = np.concatenate([q[0, :], q[1:, -1]])
    dev = q.ravel() - first[idx]
    sums = np.bincount(idx, weights=dev.real, minlength=length) + 1j * np.bincount(
        idx, weights=dev.imag, minlength=length
    )
    counts = np.bincount(idx, minlength=length)
    return as_sequence(first + sums / counts)


def cadzow_denoise(s_w, k: int, cfg: DenoiseConfig = DenoiseConfig()) -> DenoiseResult:
    """Iterate hankelize -> rank-k truncation -> anti-diagonal averaging.

    Stops once the relative l2 change of the sequence drops below
    ``cfg.epsilon`` or after ``cfg.i_max`` passes.  ``residuals`` holds the
    Frobenius distance between each Hankel matrix and its truncation.
    """
    s = as_sequence(s_w)
    q = hankelize(s)
    if not 1 <= k <= min(q.shape):
        raise DimensionError(f"k={k} outside [1, {min(q.shape)}] for {s.size} samples")
    residuals = []
    current = s
    converged = False
    iterations = 0
    while iterations < cfg.i_max:
        iterations += 1
        q = hankelize(current)
        low = rank_truncate(q, k)
        residuals.append(float(np.linalg.norm(q - low)))
        updated = dehankelize(low)
        ref = np.linalg.norm(current)
        change = np.linalg.norm(updated - current) / ref if ref > 0 else 0.0
        current = updated
        if change < cfg.epsilon:
            converged = True
            break
    return DenoiseResult(current, iterations, converged, tuple(residuals))


# -- model order estimation ---------------------------------------------------

def informative_quotients(s_w, k_hat: int, pattern: Optional[IndexPattern] = None, j: int = 0) -> np.ndarray:
    """Volume quotients without the leading 1."""
    pattern = pattern or IndexPattern.consecutive(k_hat)
    if pattern.k_hat != k_hat:
        raise ValueError(f"pattern has {pattern.k_hat} offsets, expected {k_hat}")
    return volume_quotients(s_w, pattern, j)[1:]


def stride_upper_bound(length: int, k_hat: int) -> int:
    return (length - k_hat) // (k_hat + 1)


def candidate_count(length: int, k_hat: int, i_c: int) -> int:
    """Number of offset sets whose stride-``i_c`` union polyhedron fits."""
    return math.comb(max(length - i_c * k_hat, 0), k_hat)


def unrank_combination(rank: int, n: int, k: int) -> tuple[int, ...]:
    """The ``rank``-th k-subset of ``range(n)`` in lexicographic order."""
    out = []
    x = 0
    for slot in range(k, 0, -1):
        while True:
            block = math.comb(n - x - 1, slot - 1)
            if rank < block:
                break
            rank -= block
            x += 1
        out.append(x)
        x += 1
    return tuple(out)


def _rng(seed: Seed, *key: int) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key + tuple(key))
    else:
        ss = np.random.SeedSequence(seed, spawn_key=tuple(key))
    return np.random.default_rng(ss)


def _pairs_needed(pairs: float) -> int:
    """Smallest m with C(m, 2) >= pairs."""
    m = max(2, math.ceil((1 + math.sqrt(1 + 8 * pairs)) / 2))
    while math.comb(m - 1, 2) >= pairs and m > 2:
        m -= 1
    return m


def _stratum_log_distances(s, k_hat, i_c, n_cand, m, rng):
    """Mean log pairwise distance over ``m`` sampled candidates (all if m >= n)."""
    if m >= n_cand:
        ranks = range(n_cand)
    else:
        ranks = np.sort(rng.choice(n_cand, size=m, replace=False))
    n_avail = s.size - i_c * k_hat
    phis = np.array([unrank_combination(int(r), n_avail, k_hat) for r in ranks])
    v, ok = candidate_quotients(s, k_hat, i_c, phis)
    v = v[ok, 1:]
    if v.shape[0] < 2:
        return None
    iu, ju = np.triu_indices(v.shape[0], k=1)
    dist = np.linalg.norm(v[iu] - v[ju], axis=1)
    return dist


def similarity(
    s_w,
    k_hat: int,
    kind: SimilarityKind = SimilarityKind.DIAGONAL,
    seed: Seed = 0,
    pair_budget: Optional[int] = None,
) -> float:
    """Geometric mean of distances between informative quotient vectors.

    FULL pools strides ``1 .. i_U``, DIAGONAL uses stride 1 only, RAPID
    measures one random pair.  When a stride has more candidate pairs than
    its share of ``pair_budget`` (default depends on ``kind``), a uniform
    random subset of candidates is drawn and all pairs among them are
    used.  Degenerate candidates are skipped; if nothing usable remains the
    result is ``inf``.
    """
    s = as_sequence(s_w)
    kind = SimilarityKind(kind)
    pair_budget = kind.default_pair_budget if pair_budget is None else pair_budget
    if pair_budget < 1:
        raise ValueError("pair_budget must be >= 1")
    if kind is SimilarityKind.FULL:
        strides = range(1, max(stride_upper_bound(s.size, k_hat), 1) + 1)
    else:
        strides = range(1, 2)
    counts = {i_c: candidate_count(s.size, k_hat, i_c) for i_c in strides}
    counts = {i_c: n for i_c, n in counts.items() if n >= 1}
    if sum(counts.values()) < 2 or all(n < 2 for n in counts.values()):
        raise InfeasibleError(f"fewer than two quotient candidates for k_hat={k_hat}, P={s.size}")

    rng = _rng(seed, k_hat)
    if kind is SimilarityKind.RAPID:
        return _rapid(s, k_hat, counts[1], rng)

    total_pairs = sum(math.comb(n, 2) for n in counts.values())
    log_sum = 0.0
    weight_sum = 0.0
    any_positive = False
    for i_c, n in counts.items():
        if n < 2:
            continue
        share = math.comb(n, 2) * min(1.0, pair_budget / total_pairs)
        m = min(n, _pairs_needed(share))
        dist = _stratum_log_distances(s, k_hat, i_c, n, m, rng)
        if dist is None:
            continue
        any_positive |= bool(np.any(dist > 0))
        # inverse sampling fraction keeps strata weighted by their true pair counts
        weight = math.comb(n, 2) / math.comb(m, 2)
        log_sum += weight * np.log(np.maximum(dist, _DIST_FLOOR)).sum()
        weight_sum += weight * dist.size
    if weight_sum == 0:
        return math.inf
    if not any_positive:
        return 0.0
    return float(math.exp(log_sum / weight_sum))


def _rapid(s, k_hat, n_cand, rng) -> float:
    order = rng.permutation(n_cand)
    n_avail = s.size - k_hat
    found = []
    for start in range(0, n_cand, 8):
        ranks = order[start:start + 8]
        phis = np.array([unrank_combination(int(r), n_avail, k_hat) for r in ranks])
        v, ok = candidate_quotients(s, k_hat, 1, phis)
        found.extend(v[ok, 1:])
        if len(found) >= 2:
            return float(np.linalg.norm(found[0] - found[1]))
    return math.inf


def estimate_k(
    s_w,
    k_max: Optional[int] = None,
    kind: SimilarityKind = SimilarityKind.DIAGONAL,
    seed: Seed = 0,
    pair_budget: Optional[int] = None,
) -> int:
    """Order in ``1 .. k_max`` with the smallest similarity; ties go to the smaller."""
    s = as_sequence(s_w)
    k_max = default_k_max(s.size) if k_max is None else k_max
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    best_k, best = None, math.inf
    for k_hat in range(1, k_max + 1):
        try:
            score = similarity(s, k_hat, kind, seed, pair_budget)
        except InfeasibleError:
            continue
        if best_k is None or score < best:
            best_k, best = k_hat, score
    if best_k is None:
        raise InfeasibleError(f"no feasible order up to {k_max} for {s.size} samples")
    return best_k


def decompose_noisy(
    s_w,
    k: Union[int, str, None] = "auto",
    cfg: DenoiseConfig = DenoiseConfig(),
    kind: SimilarityKind = SimilarityKind.DIAGONAL,
    seed: Seed = 0,
    k_max: Optional[int] = None,
    pair_budget: Optional[int] = None,
) -> NoisyDecomposition:
    """Estimate the order if needed, de-noise, then extract components."""
    s = as_sequence(s_w)
    if k is None or k == "auto":
        k = estimate_k(s, k_max, kind, seed, pair_budget)
    k = int(k)
    den = cadzow_denoise(s, k, cfg)
    d = extract_components(den.sequence, k)
    return NoisyDecomposition(d, k, den.sequence, den.iterations, den.converged)
