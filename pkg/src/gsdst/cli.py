"""Command-line entry point: ``gsdst synth | decompose | sim``.

Exit codes: 0 on success, 2 for bad usage or unreadable input, 3 when the
decomposition itself fails (order not detected, inconsistent result).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import io as gio
from .denoise import DenoiseConfig, SimilarityKind, decompose_noisy
from .errors import GSDError
from .gsd import decompose
from .noinfra import (
    Receiver,
    SimConfig,
    run_denoise_experiment,
    run_detection_experiment,
    run_ser_experiment,
)
from .sequence import nmse, synthesize

EXIT_OK, EXIT_INPUT, EXIT_FAILURE = 0, 2, 3


class InputError(Exception):
    """Malformed command-line input; reported with exit code 2."""


def _out(path: Optional[str], text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _load_json(path: str) -> dict:
    try:
        return gio.read_json(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


# -- synth --------------------------------------------------------------------

def cmd_synth(args) -> int:
    data = _load_json(args.config)
    try:
        d = gio.decomposition_from_dict(data)
        length = int(args.length if args.length is not None else data["length"])
        if length < 1:
            raise ValueError("length must be >= 1")
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid decomposition config: {exc}") from exc
    _out(args.out, gio.sequence_to_csv_text(synthesize(d, length)))
    print(f"k={d.k} P={length}", file=sys.stderr)
    return EXIT_OK


# -- decompose ----------------------------------------------------------------

def _parse_k(text: str):
    if text == "auto":
        return "auto"
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--k must be a positive integer or 'auto'")
    if k < 1:
        raise argparse.ArgumentTypeError("--k must be a positive integer or 'auto'")
    return k


def cmd_decompose(args) -> int:
    try:
        s = gio.read_sequence(args.sequence)
        cfg = DenoiseConfig(args.epsilon, args.imax)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read sequence: {exc}") from exc
    diagnostics = {}
    if args.noisy:
        result = decompose_noisy(s, args.k, cfg, SimilarityKind(args.similarity),
                                 seed=args.seed, k_max=args.kmax)
        d = result.decomposition
        diagnostics["denoise_iterations"] = result.iterations
        diagnostics["denoise_converged"] = result.converged
    else:
        k = None if args.k == "auto" else args.k
        d = decompose(s, k=k, k_max=args.kmax)
    with np.errstate(all="ignore"):
        approx = d.ratios[None, :] ** np.arange(s.size)[:, None] @ d.initial_terms
    diagnostics = {
        "k": d.k,
        "roundtrip_nmse": nmse(s, approx) if np.any(s != 0) else None,
        **diagnostics,
    }
    _out(args.out, gio.dumps({**gio.decomposition_to_dict(d), "diagnostics": diagnostics}))
    return EXIT_OK


# -- sim ----------------------------------------------------------------------

_EXPERIMENTS = ("ser", "detection", "denoise")


def _as_list(value, name):
    if not isinstance(value, list) or not value:
        raise InputError(f"sweep '{name}' must be a non-empty list")
    return value


def run_sim_config(data: dict, workers: int = 1):
    """Build and run the experiment described by a JSON config dict."""
    if not isinstance(data, dict):
        raise InputError("experiment config must be a JSON object")
    data = dict(data)
    kind = data.pop("experiment", None)
    if kind not in _EXPERIMENTS:
        raise InputError(f"'experiment' must be one of {', '.join(_EXPERIMENTS)}")
    sweep = data.pop("sweep", {})
    receivers = data.pop("receivers", [r.value for r in Receiver])
    if not isinstance(sweep, dict):
        raise InputError("'sweep' must be an object mapping a field to a list of values")
    try:
        cfg = SimConfig.from_dict(data)
        if kind == "ser":
            if len(sweep) > 1:
                raise InputError("a ser experiment sweeps a single field")
            (param, values), = sweep.items() if sweep else (("gamma_db", [cfg.gamma_db]),)
            if param not in cfg.to_dict():
                raise InputError(f"unknown sweep field '{param}'")
            # validate every point up front so a bad value fails before any work
            for v in _as_list(values, param):
                SimConfig.from_dict({**data, param: v})
            return run_ser_experiment(cfg, param, values, [Receiver(r) for r in receivers], workers)
        if kind == "detection":
            allowed = {"k", "gamma_db", "sigma_db", "similarity"}
            if set(sweep) - allowed:
                raise InputError(f"detection sweeps only {sorted(allowed)}")
            return run_detection_experiment(
                cfg,
                ks=_as_list(sweep.get("k", [cfg.k]), "k"),
                gammas=_as_list(sweep.get("gamma_db", [cfg.gamma_db]), "gamma_db"),
                sigmas=_as_list(sweep.get("sigma_db", [cfg.sigma_db]), "sigma_db"),
                kinds=[SimilarityKind(x) for x in _as_list(
                    sweep.get("similarity", [cfg.similarity.value]), "similarity")],
                workers=workers,
            )
        if set(sweep) - {"gamma_db"}:
            raise InputError("denoise sweeps only gamma_db")
        gammas = _as_list(sweep.get("gamma_db", [cfg.gamma_db]), "gamma_db")
        return run_denoise_experiment(cfg, gammas, workers)
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid experiment config: {exc}") from exc


def _summary(report) -> str:
    lines = [f"{report.experiment}: {report.trials_run} trials in {report.wallclock:.1f} s"]
    table = report.table()
    widths = [max(len(c), 12) for c in table.columns]
    lines.append("  ".join(c.rjust(w) for c, w in zip(table.columns, widths)))
    for row in table.rows:
        cells = [f"{v:.4g}" if isinstance(v, float) else str(v) for v in row]
        lines.append("  ".join(c.rjust(w) for c, w in zip(cells, widths)))
    return "\n".join(lines)


def cmd_sim(args) -> int:
    if args.threads < 1:
        raise InputError("--threads must be >= 1")
    report = run_sim_config(_load_json(args.config), workers=args.threads)
    os.makedirs(args.out, exist_ok=True)
    for i, table in enumerate(report.tables):
        name = report.experiment if i == 0 else f"{report.experiment}_{table.name}"
        table.write_csv(os.path.join(args.out, f"{name}.csv"))
    print(_summary(report))
    return EXIT_OK


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsdst", description="Decompose superposed complex geometric sequences."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write the samples of a decomposition as CSV")
    p.add_argument("config", help="decomposition JSON; may carry a 'length' field")
    p.add_argument("--length", "-P", type=int, help="number of samples (overrides the config)")
    p.add_argument("--out", "-o", help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("decompose", help="recover components from a sequence CSV")
    p.add_argument("sequence", help="CSV with header index,re,im")
    p.add_argument("--noisy", action="store_true", help="estimate order and de-noise first")
    p.add_argument("--k", type=_parse_k, default="auto", help="number of components or 'auto'")
    p.add_argument("--kmax", type=int, default=None, help="largest order considered")
    p.add_argument("--similarity", choices=[k.value for k in SimilarityKind],
                   default=SimilarityKind.DIAGONAL.value)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=DenoiseConfig.epsilon)
    p.add_argument("--imax", type=int, default=DenoiseConfig.i_max)
    p.add_argument("--out", "-o", help="output JSON (default: stdout)")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("sim", help="run a Monte Carlo experiment from a JSON config")
    p.add_argument("config", help="experiment JSON")
    p.add_argument("--out", required=True, help="directory for report CSVs")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_sim)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GSDError, np.linalg.LinAlgError) as exc:
        print(f"decomposition failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
