"""Seeded Monte Carlo experiments and their tabular reports.

Trial ``t`` always draws from ``SeedSequence(seed, spawn_key=(t,))``, so a
trial sees the same random numbers at every sweep point and for every
receiver, and results do not depend on how trials are split over worker
processes.  Per-trial outcomes are stored by trial index and reduced in
index order, which keeps reports bit-identical for a given seed.
"""
from __future__ import annotations

import csv
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from ..denoise import SimilarityKind, decompose_noisy, estimate_k
from ..errors import GSDError
from ..gsd import DegeneracyWarning, extract_components
from ..sequence import nmse
from .model import Receiver, SimConfig, clean_sequence, draw_scenario, received_sequence
from .receivers import noinfra_receive, ora_sic_receive


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.columns)
            writer.writerows([_fmt(v) for v in row] for row in self.rows)


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return value


@dataclass(frozen=True)
class SimReport:
    """Result tables of one experiment.

    ``wallclock`` is informational and never written to the CSV files.
    """

    experiment: str
    tables: tuple[Table, ...]
    trials_run: int
    wallclock: float
    config: dict

    def table(self, name: Optional[str] = None) -> Table:
        if name is None:
            return self.tables[0]
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)


def trial_seed(cfg: SimConfig, t: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(cfg.seed, spawn_key=(t,))


def trial_rng(cfg: SimConfig, t: int) -> np.random.Generator:
    return np.random.default_rng(trial_seed(cfg, t))


def _chunk(fn, start, stop):
    # noisy trials routinely hit near-degenerate ratio sets; failures are counted instead
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        return np.array([fn(t) for t in range(start, stop)], dtype=float)


def run_trials(fn: Callable[[int], Sequence[float]], trials: int, workers: int = 1) -> np.ndarray:
    """Evaluate ``fn(t)`` for each trial; rows are ordered by trial index.

    ``fn`` must be picklable (a module-level function or a ``partial`` of
    one) when ``workers > 1``.
    """
    if workers <= 1 or trials < 2:
        return _chunk(fn, 0, trials)
    bounds = np.linspace(0, trials, min(workers, trials) + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_chunk, [fn] * (bounds.size - 1), bounds[:-1], bounds[1:])
        return np.concatenate(list(parts))


# -- symbol error rate --------------------------------------------------------

def _ser_trial(cfg: SimConfig, receivers: tuple[Receiver, ...], t: int) -> list[float]:
    errors = []
    for receiver in receivers:
        rng = trial_rng(cfg, t)
        txs, nv = draw_scenario(cfg, rng, receiver)
        s_w = received_sequence(txs, nv, cfg, rng)
        if receiver is Receiver.NO_INFRA:
            decided = noinfra_receive(s_w, [(tx.beta, tx.theta) for tx in txs], cfg.k, cfg)
        else:
            decided = ora_sic_receive(s_w, txs, cfg)
        errors.append(sum(d != tx.symbol_index for d, tx in zip(decided, txs)))
    return errors


def run_ser_experiment(
    cfg: SimConfig,
    param: str = "gamma_db",
    values: Optional[Iterable] = None,
    receivers: Sequence[Receiver] = (Receiver.NO_INFRA, Receiver.ORA_SIC),
    workers: int = 1,
) -> SimReport:
    """SER of each receiver as ``param`` sweeps over ``values``.

    ``k`` is known to the receivers.  One table row per sweep point with
    columns ``param`` and ``<receiver>_ser``.
    """
    start = time.perf_counter()
    values = [getattr(cfg, param)] if values is None else list(values)
    receivers = tuple(Receiver(r) for r in receivers)
    rows = []
    for value in values:
        point = replace(cfg, **{param: value})
        errs = run_trials(partial(_ser_trial, point, receivers), point.trials, workers)
        total = errs.sum(axis=0)
        rows.append((value, *(float(e) / (point.k * point.trials) for e in total)))
    cols = (param, *(f"{r.value}_ser" for r in receivers))
    return SimReport("ser", (Table("ser", cols, tuple(rows)),), cfg.trials * len(values),
                     time.perf_counter() - start, cfg.to_dict())


# -- model-order detection ----------------------------------------------------

def _detection_trial(cfg: SimConfig, t: int) -> list[float]:
    rng = trial_rng(cfg, t)
    txs, nv = draw_scenario(cfg, rng, Receiver.NO_INFRA)
    s_w = received_sequence(txs, nv, cfg, rng)
    try:
        k_hat = estimate_k(s_w, cfg.k_max, cfg.similarity, trial_seed(cfg, t), cfg.pair_budget)
    except GSDError:
        return [0.0]
    return [float(k_hat == cfg.k)]


def run_detection_experiment(
    cfg: SimConfig,
    ks: Iterable[int] = (1, 2, 3, 4),
    gammas: Iterable[float] = (30.0, 60.0),
    sigmas: Iterable[float] = (0.0, 10.0),
    kinds: Iterable[SimilarityKind] = (SimilarityKind.DIAGONAL,),
    workers: int = 1,
) -> SimReport:
    """Fraction of trials where the estimated order equals the true ``k``.

    The order is estimated from the raw noisy samples over ``1 .. k_max``.
    """
    start = time.perf_counter()
    rows = []
    total = 0
    for kind in kinds:
        kind = SimilarityKind(kind)
        for k in ks:
            for gamma in gammas:
                for sigma in sigmas:
                    point = replace(cfg, k=k, gamma_db=gamma, sigma_db=sigma, similarity=kind)
                    hits = run_trials(partial(_detection_trial, point), point.trials, workers)
                    rows.append((k, gamma, sigma, kind.value, float(hits.mean())))
                    total += point.trials
    table = Table("detection", ("k", "gamma_db", "sigma_db", "kind", "rate"), tuple(rows))
    return SimReport("detection", (table,), total, time.perf_counter() - start, cfg.to_dict())


# -- de-noising ---------------------------------------------------------------

def _reconstruction_nmse(clean, decomposition) -> float:
    with np.errstate(all="ignore"):
        approx = decomposition.ratios[None, :] ** np.arange(clean.size)[:, None] @ decomposition.initial_terms
    if not np.all(np.isfinite(approx)):
        return np.nan
    return nmse(clean, approx)


def _denoise_trial(cfg: SimConfig, t: int) -> list[float]:
    rng = trial_rng(cfg, t)
    txs, nv = draw_scenario(cfg, rng, Receiver.NO_INFRA)
    s_w = received_sequence(txs, nv, cfg, rng)
    clean = clean_sequence(txs, cfg)
    observed = nmse(clean, s_w)
    try:
        raw = _reconstruction_nmse(clean, extract_components(s_w, cfg.k))
    except (GSDError, np.linalg.LinAlgError):
        raw = np.nan
    try:
        res = decompose_noisy(s_w, cfg.k, cfg.denoise)
        den = _reconstruction_nmse(clean, res.decomposition)
        iterations, converged = res.iterations, res.converged
    except (GSDError, np.linalg.LinAlgError):
        den, iterations, converged = np.nan, cfg.i_max, False
    return [observed, raw, den, float(iterations), float(converged)]


def run_denoise_experiment(
    cfg: SimConfig,
    gammas: Iterable[float] = (5.0, 20.0, 40.0, 60.0, 80.0, 100.0),
    workers: int = 1,
) -> SimReport:
    """NMSE against the clean samples, with ``k`` known, per SNR point.

    Reports the observed samples, a reconstruction from the raw samples,
    and a reconstruction after de-noising.  Reconstructions that fail are
    left out of the mean and counted in ``*_failures``.  A second table
    holds the distribution of de-noising iteration counts.
    """
    start = time.perf_counter()
    rows, hist_rows = [], []
    for gamma in gammas:
        point = replace(cfg, gamma_db=gamma)
        out = run_trials(partial(_denoise_trial, point), point.trials, workers)
        observed, raw, den, iters, conv = out.T
        rows.append((
            gamma,
            float(observed.mean()),
            float(np.nanmean(raw)) if np.any(np.isfinite(raw)) else float("nan"),
            float(np.nanmean(den)) if np.any(np.isfinite(den)) else float("nan"),
            int(np.sum(~np.isfinite(raw))),
            int(np.sum(~np.isfinite(den))),
            float(iters.mean()),
            float(1.0 - conv.mean()),
        ))
        counts = np.bincount(iters.astype(int), minlength=point.i_max + 1)
        hist_rows.extend((gamma, i, int(counts[i])) for i in range(1, point.i_max + 1))
    main = Table(
        "denoise",
        ("gamma_db", "nmse_observed", "nmse_raw", "nmse_denoised", "raw_failures",
         "denoised_failures", "mean_iterations", "nonconverged_fraction"),
        tuple(rows),
    )
    hist = Table("iterations", ("gamma_db", "iterations", "count"), tuple(hist_rows))
    return SimReport("denoise", (main, hist), cfg.trials * len(rows),
                     time.perf_counter() - start, cfg.to_dict())
