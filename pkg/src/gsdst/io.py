"""File formats: sequences as CSV, decompositions as JSON."""
from __future__ import annotations

import csv
import io
import json
from typing import TextIO, Union

import numpy as np

from .sequence import Decomposition, as_sequence

PathOrFile = Union[str, TextIO]

SEQUENCE_HEADER = ("index", "re", "im")


def fmt(x: float) -> str:
    """Text at 17 significant digits, enough to round-trip any double."""
    return format(float(x), ".17g")


def _open(target: PathOrFile, mode: str):
    if isinstance(target, str):
        return open(target, mode, newline="")
    return _NoClose(target)


class _NoClose:
    def __init__(self, fh):
        self.fh = fh

    def __enter__(self):
        return self.fh

    def __exit__(self, *exc):
        return False


def write_sequence(samples, target: PathOrFile) -> None:
    s = as_sequence(samples)
    with _open(target, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SEQUENCE_HEADER)
        for i, v in enumerate(s):
            writer.writerow((i, fmt(v.real), fmt(v.imag)))


def read_sequence(source: PathOrFile) -> np.ndarray:
    """Parse ``index,re,im`` rows; indices must run 0 .. P-1."""
    with _open(source, "r") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != SEQUENCE_HEADER:
            raise ValueError(f"expected header {','.join(SEQUENCE_HEADER)}")
        values = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ValueError(f"line {lineno}: expected 3 fields, got {len(row)}")
            idx, re_, im = row
            if int(idx) != len(values):
                raise ValueError(f"line {lineno}: index {idx} out of order")
            values.append(complex(float(re_), float(im)))
    return as_sequence(values)


def _cplx(value) -> complex:
    if not isinstance(value, dict) or set(value) != {"re", "im"}:
        raise ValueError(f"expected {{'re': .., 'im': ..}}, got {value!r}")
    return complex(float(value["re"]), float(value["im"]))


def _obj(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def decomposition_to_dict(d: Decomposition) -> dict:
    return {"components": [{"a": _obj(c.a), "r": _obj(c.r)} for c in d.components]}


def decomposition_from_dict(data: dict, validate: bool = True) -> Decomposition:
    comps = data.get("components") if isinstance(data, dict) else None
    if not isinstance(comps, list) or not comps:
        raise ValueError("'components' must be a non-empty list")
    a = [_cplx(c["a"]) for c in comps]
    r = [_cplx(c["r"]) for c in comps]
    return Decomposition.from_arrays(a, r, validate=validate)


def dumps(data: dict) -> str:
    """Indented JSON; floats use the shortest exact round-trip form."""
    return json.dumps(data, indent=2) + "\n"


def read_json(source: PathOrFile) -> dict:
    with _open(source, "r") as fh:
        return json.load(fh)


def sequence_to_csv_text(samples) -> str:
    buf = io.StringIO()
    write_sequence(samples, buf)
    return buf.getvalue()


__all__ = [
    "decomposition_from_dict",
    "decomposition_to_dict",
    "dumps",
    "fmt",
    "read_json",
    "read_sequence",
    "sequence_to_csv_text",
    "write_sequence",
]
