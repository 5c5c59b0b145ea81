"""Shared fixtures and independent oracles for the test suite."""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from gsdst import Decomposition, synthesize

# Real worked example: components (2, 2), (1, 3), (4, -1).
REAL_A = np.array([2, 1, 4], dtype=complex)
REAL_R = np.array([2, 3, -1], dtype=complex)
REAL_S = np.array([7, 3, 21, 39, 117, 303, 861, 2439, 7077], dtype=complex)

# Complex worked example.
CPLX_A = np.array([64 + 32j, 0.125 + 0.0625j])
CPLX_R = np.array([0.5 - 0.5j, 2 + 1j])
CPLX_S4 = np.array([64.125 + 32.0625j, 48.1875 - 15.75j, 16.125 - 31.3125j, -8.4375 - 22.5j])


@pytest.fixture
def real_decomposition():
    return Decomposition.from_arrays(REAL_A, REAL_R)


@pytest.fixture
def complex_decomposition():
    return Decomposition.from_arrays(CPLX_A, CPLX_R)


def leibniz_det(m) -> complex:
    """Determinant by the permutation expansion, in exact rationals when possible."""
    m = np.asarray(m)
    n = m.shape[0]
    total = 0
    for perm in itertools.permutations(range(n)):
        inversions = sum(perm[i] > perm[j] for i in range(n) for j in range(i + 1, n))
        term = -1 if inversions % 2 else 1
        for row, col in enumerate(perm):
            term = term * m[row, col]
        total += term
    return complex(total)


def exact_det(rows) -> Fraction:
    """Exact determinant of an integer matrix via Fraction elimination."""
    a = [[Fraction(int(x)) for x in row] for row in rows]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


def elementary_symmetric(r) -> np.ndarray:
    """(e_0, ..., e_k) of the values in ``r`` by explicit subset products."""
    r = list(r)
    return np.array(
        [sum((math.prod(c) for c in itertools.combinations(r, l)), start=0j) for l in range(len(r) + 1)],
        dtype=complex,
    )


def random_decomposition(rng, k, r_mag=(0.5, 2.0), min_sep=0.3, a_mag=(0.5, 2.0)):
    """Random well-separated components; rejection-samples the ratios."""
    while True:
        r = rng.uniform(*r_mag, k) * np.exp(2j * np.pi * rng.random(k))
        gaps = np.abs(r[:, None] - r[None, :]) + np.eye(k) * 10
        if gaps.min() >= min_sep:
            break
    a = rng.uniform(*a_mag, k) * np.exp(2j * np.pi * rng.random(k))
    return Decomposition.from_arrays(a, r)


@st.composite
def decompositions(draw, k_min=1, k_max=4):
    """Hypothesis strategy for well-separated decompositions."""
    k = draw(st.integers(k_min, k_max))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_decomposition(np.random.default_rng(seed), k)


def unit_circle_sequence(rng, k, length, snr_db=None):
    """Sum of k unit-modulus exponentials; ``snr_db`` scales each amplitude against unit noise."""
    f = rng.random(k)
    r = np.exp(2j * np.pi * f)
    a = np.exp(2j * np.pi * rng.random(k))
    if snr_db is not None:
        a = a * 10 ** (snr_db / 20)
    d = Decomposition.from_arrays(a, r, validate=False)
    s = synthesize(d, length)
    return d, s


#: (criterion, verdict, detail) lines collected by the acceptance suite.
ACCEPTANCE_LINES: list[tuple[int, str, str]] = []


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    verdict = "PASS" if passed else "FAIL"
    ACCEPTANCE_LINES.append((number, verdict, detail))
    print(f"criterion {number}: {verdict} {detail}", flush=True)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, verdict, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {detail}")
