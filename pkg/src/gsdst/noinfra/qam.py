"""Gray-coded QAM with unit average symbol energy."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


def _check_order(M: int) -> int:
    M = int(M)
    if M < 2 or M & (M - 1):
        raise ValueError(f"modulation order must be a power of two >= 2, got {M}")
    return M


def _gray_pam(bits: int) -> np.ndarray:
    """Amplitude of each Gray label on a ``2**bits``-level PAM grid."""
    levels = 1 << bits
    positions = np.arange(levels)
    gray = positions ^ (positions >> 1)
    amp = np.empty(levels)
    amp[gray] = 2 * positions - (levels - 1)
    return amp


@lru_cache(maxsize=None)
def constellation(M: int) -> np.ndarray:
    """All ``M`` points indexed by symbol; square for even ``log2 M``, else rectangular.

    The high bits of an index select the in-phase level and the low bits the
    quadrature level, so neighbours differ in one bit.
    """
    M = _check_order(M)
    m = M.bit_length() - 1
    bits_i = (m + 1) // 2
    bits_q = m - bits_i
    pam_i = _gray_pam(bits_i)
    pam_q = _gray_pam(bits_q) if bits_q else np.zeros(1)
    idx = np.arange(M)
    points = pam_i[idx >> bits_q] + 1j * pam_q[idx & ((1 << bits_q) - 1)]
    points = points / np.sqrt(np.mean(np.abs(points) ** 2))
    points.flags.writeable = False
    return points


def qam_modulate(index, M: int):
    """Constellation point(s) for symbol index (or array of indices)."""
    points = constellation(M)
    idx = np.asarray(index)
    if not np.issubdtype(idx.dtype, np.integer):
        raise TypeError("symbol indices must be integers")
    if np.any((idx < 0) | (idx >= points.size)):
        raise ValueError(f"symbol index out of range [0, {points.size})")
    out = points[idx]
    return complex(out) if out.ndim == 0 else out


def qam_demodulate(y, M: int):
    """Nearest constellation index; exact ties go to the smaller index."""
    points = constellation(M)
    y = np.asarray(y, dtype=complex)
    idx = np.argmin(np.abs(y[..., None] - points) ** 2, axis=-1)
    return int(idx) if idx.ndim == 0 else idx
