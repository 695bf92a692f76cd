"""Reader for the pathvol CSV dialect.

Files start with `# pathvol v1 <kind> key=value ...`; continuous paths
carry `x,value` rows, cadlag paths `x,left,right` rows where `inf` marks
the level from which the path is infinite and `NA` marks undetermined
levels, and tables carry a `columns=` key. This module is deliberately
standalone: figures consume only the file format, not the library.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_MAGIC = "# pathvol v1"


class FormatError(ValueError):
    pass


@dataclass
class PathFile:
    kind: str
    meta: dict
    x: np.ndarray = field(default_factory=lambda: np.empty(0))
    values: np.ndarray = field(default_factory=lambda: np.empty(0))
    left: np.ndarray = field(default_factory=lambda: np.empty(0))
    right: np.ndarray = field(default_factory=lambda: np.empty(0))
    infinite_from: float | None = None
    unresolved_from: float | None = None
    columns: dict = field(default_factory=dict)


def _parse_meta(tokens: list[str]) -> dict:
    meta = {}
    for tok in tokens:
        key, _, raw = tok.partition("=")
        if raw.startswith("'") and raw.endswith("'"):
            meta[key] = raw[1:-1]
        else:
            try:
                meta[key] = float(raw)
            except ValueError:
                meta[key] = raw
    return meta


def read(path) -> PathFile:
    with open(path) as fh:
        text = fh.read()
    kind = None
    meta: dict = {}
    rows: list[list[str]] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith(_MAGIC):
                tokens = line[len(_MAGIC):].split()
                kind = tokens[0]
                meta = _parse_meta(tokens[1:])
            continue
        rows.append(line.split(","))
    if kind is None:
        raise FormatError(f"{path}: missing pathvol header")

    out = PathFile(kind=kind, meta=meta)
    if kind == "continuous":
        out.x = np.array([float(r[0]) for r in rows])
        out.values = np.array([float(r[1]) for r in rows])
    elif kind == "cadlag":
        bx, bl, br = [], [], []
        for r in rows:
            if r[1] == "NA":
                out.unresolved_from = float(r[0])
                continue
            if r[1] == "inf":
                out.infinite_from = float(r[0])
                continue
            bx.append(float(r[0]))
            bl.append(float(r[1]))
            if r[2] == "inf":
                out.infinite_from = float(r[0])
                br.append(float(r[1]))
            else:
                br.append(float(r[2]))
        out.x = np.array(bx)
        out.left = np.array(bl)
        out.right = np.array(br)
    elif kind == "table":
        names = meta.get("columns", "")
        names = names.split(",") if names else []
        data = np.array([[float(v) for v in r] for r in rows]) if rows else \
            np.empty((0, len(names)))
        for j, name in enumerate(names):
            out.columns[name] = data[:, j]
    else:
        raise FormatError(f"{path}: unknown kind {kind!r}")
    return out


def staircase_points(pf: PathFile):
    """Plot-ready (t, value) arrays for a cadlag file, jumps drawn vertical."""
    ts, vs = [], []
    for i in range(pf.x.size):
        ts.append(pf.x[i])
        vs.append(pf.left[i])
        if pf.right[i] != pf.left[i]:
            ts.append(pf.x[i])
            vs.append(pf.right[i])
    return np.array(ts), np.array(vs)
