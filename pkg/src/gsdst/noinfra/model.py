"""Uplink signal model: random transmitters on a single-path channel.

Each transmitter sends one QAM symbol on its own carrier for one symbol
duration.  Sampled at ``T/P``, transmitter n contributes the geometric
sequence ``beta_n e^{j theta_n} x_n r_n**l`` with ``r_n = e^{j 2 pi f~_n T/P}``,
where ``f~_n`` is the carrier plus its Doppler shift.  Noise is circular
complex Gaussian with unit variance, so each transmitter's SNR is carried
entirely by ``beta_n``.
"""
from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from ..denoise import DenoiseConfig, SimilarityKind
from .qam import constellation, qam_modulate

NOISE_VARIANCE = 1.0


class Receiver(enum.Enum):
    NO_INFRA = "noinfra"
    ORA_SIC = "orasic"


class Association(enum.Enum):
    """How recovered components are assigned to known transmitters."""

    JOINT = "joint"
    MAGNITUDE = "magnitude"


@dataclass(frozen=True)
class SimConfig:
    center_frequency: float = 6e9
    bandwidth: float = 1e6
    symbol_duration: float = 30e-6
    samples_per_symbol: int = 30
    k: int = 2
    modulation_order: int = 16
    gamma_db: float = 30.0
    sigma_db: float = 0.0
    doppler_range: tuple[float, float] = (-1e3, 1e3)
    delay_spread_range: tuple[float, float] = (0.0, 1e-6)
    trials: int = 10_000
    seed: int = 0
    receiver: Receiver = Receiver.NO_INFRA
    similarity: SimilarityKind = SimilarityKind.DIAGONAL
    k_max: int = 4
    pair_budget: Optional[int] = None
    epsilon: float = 1e-10
    i_max: int = 30
    association: Association = Association.JOINT
    noise_variance: float = NOISE_VARIANCE

    def __post_init__(self):
        set_ = lambda name, value: object.__setattr__(self, name, value)  # noqa: E731
        set_("receiver", Receiver(self.receiver))
        set_("similarity", SimilarityKind(self.similarity))
        set_("association", Association(self.association))
        for name in ("doppler_range", "delay_spread_range"):
            lo, hi = (float(x) for x in getattr(self, name))
            if lo > hi:
                raise ValueError(f"{name} must be (low, high) with low <= high")
            set_(name, (lo, hi))
        M = int(self.modulation_order)
        if M < 2 or M & (M - 1):
            raise ValueError(f"modulation_order must be a power of two >= 2, got {M}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.samples_per_symbol < 3:
            raise ValueError("samples_per_symbol must be >= 3")
        if not (self.bandwidth > 0 and self.symbol_duration > 0):
            raise ValueError("bandwidth and symbol_duration must be positive")
        if not 1 / self.symbol_duration < self.bandwidth:
            raise ValueError("bandwidth must exceed 1/symbol_duration")
        if self.sigma_db < 0:
            raise ValueError("sigma_db must be nonnegative")
        if not self.noise_variance >= 0:
            raise ValueError("noise_variance must be nonnegative")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        DenoiseConfig(self.epsilon, self.i_max)

    @property
    def sample_interval(self) -> float:
        return self.symbol_duration / self.samples_per_symbol

    @property
    def denoise(self) -> DenoiseConfig:
        return DenoiseConfig(self.epsilon, self.i_max)

    def to_dict(self) -> dict:
        out = asdict(self)
        for key, value in out.items():
            if isinstance(value, enum.Enum):
                out[key] = value.value
            elif isinstance(value, tuple):
                out[key] = list(value)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class TransmitterRealization:
    symbol_index: int
    x: complex
    f: float
    f_tilde: float
    beta: float
    theta: float
    snr_db: float
    subcarrier: Optional[int] = None  # grid index for the orthogonal baseline


def draw_scenario(cfg: SimConfig, rng: np.random.Generator, receiver: Optional[Receiver] = None):
    """Random transmitters for one trial, plus the noise variance.

    The variance is 1 unless the config overrides it (0 gives clean samples).

    Every random quantity is drawn in a fixed order whichever receiver is
    selected, so two receivers fed from equally seeded generators see the
    same SNRs, delays, Doppler shifts, symbols and noise.
    """
    receiver = Receiver(receiver or cfg.receiver)
    k, T, F, P = cfg.k, cfg.symbol_duration, cfg.bandwidth, cfg.samples_per_symbol
    snr_db = cfg.gamma_db + cfg.sigma_db * rng.standard_normal(k)
    tau = rng.uniform(*cfg.delay_spread_range, size=k)
    doppler = rng.uniform(*cfg.doppler_range, size=k)
    symbols = rng.integers(cfg.modulation_order, size=k)
    f_random = rng.uniform(1 / T, F, size=k)
    grid = rng.integers(1, P + 1, size=k)
    if receiver is Receiver.NO_INFRA:
        f, sub = f_random, [None] * k
    else:
        f, sub = grid / T, [int(g) for g in grid]
    f_tilde = f + doppler
    theta = np.mod(-2 * np.pi * f_tilde * tau, 2 * np.pi)
    beta = 10 ** (snr_db / 20)
    x = qam_modulate(symbols, cfg.modulation_order)
    txs = [
        TransmitterRealization(int(symbols[n]), complex(x[n]), float(f[n]), float(f_tilde[n]),
                               float(beta[n]), float(theta[n]), float(snr_db[n]), sub[n])
        for n in range(k)
    ]
    return txs, float(cfg.noise_variance)


def component_arrays(txs, cfg: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """Initial terms and common ratios implied by a set of transmitters."""
    a = np.array([t.beta * np.exp(1j * t.theta) * t.x for t in txs], dtype=complex)
    r = np.exp(2j * np.pi * np.array([t.f_tilde for t in txs]) * cfg.sample_interval)
    return a, r


def clean_sequence(txs, cfg: SimConfig) -> np.ndarray:
    a, r = component_arrays(txs, cfg)
    return (r[None, :] ** np.arange(cfg.samples_per_symbol)[:, None]) @ a


def received_sequence(txs, noise_variance: float, cfg: SimConfig, rng: np.random.Generator) -> np.ndarray:
    """Superposed samples plus circular complex Gaussian noise."""
    P = cfg.samples_per_symbol
    noise = rng.standard_normal(P) + 1j * rng.standard_normal(P)
    return clean_sequence(txs, cfg) + np.sqrt(noise_variance / 2) * noise


__all__ = [
    "Association",
    "NOISE_VARIANCE",
    "Receiver",
    "SimConfig",
    "TransmitterRealization",
    "clean_sequence",
    "component_arrays",
    "constellation",
    "draw_scenario",
    "received_sequence",
]
