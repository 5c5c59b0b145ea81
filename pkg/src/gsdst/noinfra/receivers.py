"""Receivers: geometric-sequence separation versus DFT plus SIC."""
from __future__ import annotations

from typing import Sequence, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..denoise import decompose_noisy
from ..errors import GSDError
from .model import Association, SimConfig, TransmitterRealization
from .qam import constellation, qam_demodulate

#: Demodulated index reported for a transmitter the receiver could not serve.
LOST = -1


def _association_cost(a: np.ndarray, known: np.ndarray, M: int, rule: Association) -> np.ndarray:
    """``cost[i, n]`` of explaining recovered term ``a[i]`` by transmitter ``n``."""
    beta, theta = known[:, 0], known[:, 1]
    if rule is Association.MAGNITUDE:
        return np.abs(np.abs(a)[:, None] - beta[None, :])
    gain = beta * np.exp(1j * theta)  # (n,)
    points = constellation(M)
    # residual of the best symbol decision for each (component, transmitter)
    resid = a[:, None, None] - gain[None, :, None] * points[None, None, :]
    return np.min(np.abs(resid) ** 2, axis=-1)


def noinfra_receive(
    s_w,
    known: Sequence[tuple[float, float]],
    k: Union[int, str, None],
    cfg: SimConfig,
) -> list[int]:
    """Separate the superposed carriers and demodulate each transmitter.

    ``known`` holds each transmitter's ``(beta, theta)``.  Recovered
    components are assigned to transmitters with a minimum-cost matching
    (see :class:`Association`), then ``x = a / (beta e^{j theta})`` is
    sliced.  If the decomposition fails every transmitter is reported as
    :data:`LOST`.
    """
    known = np.asarray(known, dtype=float).reshape(-1, 2)
    n_tx = known.shape[0]
    try:
        result = decompose_noisy(
            s_w, k, cfg.denoise, cfg.similarity, seed=cfg.seed,
            k_max=cfg.k_max, pair_budget=cfg.pair_budget,
        )
    except (GSDError, np.linalg.LinAlgError):
        return [LOST] * n_tx
    a = result.decomposition.initial_terms
    if not np.all(np.isfinite(a)):
        return [LOST] * n_tx
    cost = _association_cost(a, known, cfg.modulation_order, cfg.association)
    rows, cols = linear_sum_assignment(cost)
    out = [LOST] * n_tx
    for i, n in zip(rows, cols):
        beta, theta = known[n]
        out[n] = qam_demodulate(a[i] / (beta * np.exp(1j * theta)), cfg.modulation_order)
    return out


def _dft_bin(s: np.ndarray, b: int) -> complex:
    P = s.size
    return complex(np.exp(-2j * np.pi * b * np.arange(P) / P) @ s)


def ora_sic_receive(s_w, known: Sequence[TransmitterRealization], cfg: SimConfig) -> list[int]:
    """DFT demodulation on the subcarrier grid with per-bin SIC.

    A transmitter alone in its bin is sliced directly from the bin value.
    Transmitters sharing a bin are decoded strongest first; each decoded
    symbol is regenerated with the true Doppler-shifted carrier, removed
    from the samples, and the bin is re-evaluated for the next one.
    """
    s = np.asarray(s_w, dtype=complex)
    P = s.size
    M = cfg.modulation_order
    out = [LOST] * len(known)
    bins: dict[int, list[int]] = {}
    for n, tx in enumerate(known):
        if tx.subcarrier is None:
            raise ValueError("ORA+SIC needs grid subcarriers")
        bins.setdefault(tx.subcarrier % P, []).append(n)
    l = np.arange(P)
    for b, users in bins.items():
        residual = s
        for n in sorted(users, key=lambda u: -known[u].beta):
            tx = known[n]
            gain = tx.beta * np.exp(1j * tx.theta)
            idx = qam_demodulate(_dft_bin(residual, b) / (P * gain), M)
            out[n] = idx
            if len(users) > 1:
                r = np.exp(2j * np.pi * tx.f_tilde * cfg.sample_interval)
                residual = residual - gain * constellation(M)[idx] * r ** l
    return out
