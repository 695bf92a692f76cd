"""CSV serialization for paths, tables and key=value reports.

Every file starts with a header line

    # pathvol v1 <kind> key=value key=value ...

followed by data rows. Continuous paths use ``x,value`` rows; cadlag paths
use ``x,left,right`` rows, where the sentinel regions appear as literal
``inf`` (path is +inf from that level on) or ``NA`` (exit undetermined at
the realized extent). Tables carry a ``columns=`` key and one comma row per
grid node. An optional ``# generated <timestamp>`` comment line follows the
header unless suppressed.
"""

from __future__ import annotations

import datetime
import math
from typing import IO

import numpy as np

from .paths import CadlagPath, ContinuousPath

__all__ = [
    "write_continuous",
    "write_cadlag",
    "write_table",
    "write_report",
    "read_csv",
    "read_continuous",
    "read_cadlag",
    "read_report",
]

_MAGIC = "# pathvol v1"


def _fmt(x: float) -> str:
    return repr(float(x))


def _header(kind: str, meta: dict | None) -> str:
    parts = [_MAGIC, kind]
    for key, val in (meta or {}).items():
        if val is None:
            continue
        parts.append(f"{key}={val!r}" if isinstance(val, str) else f"{key}={val}")
    return " ".join(parts)


def _open_for_write(file) -> tuple[IO, bool]:
    if hasattr(file, "write"):
        return file, False
    return open(file, "w", newline="\n"), True


def _emit(fh: IO, lines: list[str]) -> None:
    fh.write("\n".join(lines) + "\n")


def _stamp(lines: list[str], timestamp: bool) -> None:
    if timestamp:
        now = datetime.datetime.now(datetime.timezone.utc).isoformat()
        lines.append(f"# generated {now}")


def write_continuous(path: ContinuousPath, file, meta: dict | None = None,
                     timestamp: bool = False) -> None:
    lines = [_header("continuous", meta)]
    _stamp(lines, timestamp)
    for x, v in zip(path.grid, path.values):
        lines.append(f"{_fmt(x)},{_fmt(v)}")
    fh, close = _open_for_write(file)
    try:
        _emit(fh, lines)
    finally:
        if close:
            fh.close()


def write_cadlag(path: CadlagPath, file, meta: dict | None = None,
                 timestamp: bool = False) -> None:
    full_meta = dict(meta or {})
    full_meta.setdefault("initial_value", path.initial_value)
    lines = [_header("cadlag", full_meta)]
    _stamp(lines, timestamp)
    inf_from = path.infinite_from
    for x, lv, rv in zip(path.breakpoints, path.left_values, path.right_values):
        if inf_from is not None and x == inf_from:
            lines.append(f"{_fmt(x)},{_fmt(lv)},inf")
        else:
            lines.append(f"{_fmt(x)},{_fmt(lv)},{_fmt(rv)}")
    if inf_from is not None and (path.breakpoints.size == 0
                                 or path.breakpoints[-1] < inf_from):
        lines.append(f"{_fmt(inf_from)},inf,inf")
    if path.unresolved_from is not None:
        lines.append(f"{_fmt(path.unresolved_from)},NA,NA")
    fh, close = _open_for_write(file)
    try:
        _emit(fh, lines)
    finally:
        if close:
            fh.close()


def write_table(columns: dict[str, np.ndarray], file, meta: dict | None = None,
                timestamp: bool = False) -> None:
    names = list(columns)
    arrays = [np.asarray(columns[n], dtype=float) for n in names]
    n = arrays[0].size
    if any(a.size != n for a in arrays):
        raise ValueError("table columns must have equal length")
    full_meta = {"columns": ",".join(names)}
    full_meta.update(meta or {})
    lines = [_header("table", full_meta)]
    _stamp(lines, timestamp)
    for i in range(n):
        lines.append(",".join(_fmt(a[i]) for a in arrays))
    fh, close = _open_for_write(file)
    try:
        _emit(fh, lines)
    finally:
        if close:
            fh.close()


def write_report(entries: dict, file, timestamp: bool = False) -> None:
    """Plain key=value lines, one per entry."""
    lines = []
    _stamp(lines, timestamp)
    for key, val in entries.items():
        lines.append(f"{key}={_fmt(val) if isinstance(val, float) else val}")
    fh, close = _open_for_write(file)
    try:
        _emit(fh, lines)
    finally:
        if close:
            fh.close()


def _parse_meta(tokens: list[str]) -> dict:
    meta = {}
    for tok in tokens:
        key, _, raw = tok.partition("=")
        if raw.startswith("'") and raw.endswith("'"):
            meta[key] = raw[1:-1]
        else:
            try:
                meta[key] = int(raw)
            except ValueError:
                try:
                    meta[key] = float(raw)
                except ValueError:
                    meta[key] = raw
    return meta


def read_csv(file):
    """Parse a pathvol CSV into (kind, meta, rows of string fields)."""
    if hasattr(file, "read"):
        text = file.read()
    else:
        with open(file) as fh:
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
        raise ValueError("missing pathvol header line")
    return kind, meta, rows


def read_continuous(file) -> tuple[ContinuousPath, dict]:
    kind, meta, rows = read_csv(file)
    if kind != "continuous":
        raise ValueError(f"expected a continuous path file, found {kind!r}")
    grid = np.array([float(r[0]) for r in rows])
    values = np.array([float(r[1]) for r in rows])
    return ContinuousPath(grid, values), meta


def read_cadlag(file) -> tuple[CadlagPath, dict]:
    kind, meta, rows = read_csv(file)
    if kind != "cadlag":
        raise ValueError(f"expected a cadlag path file, found {kind!r}")
    bp: list[float] = []
    lv: list[float] = []
    rv: list[float] = []
    infinite_from = None
    unresolved_from = None
    for r in rows:
        x = float(r[0])
        if r[1] == "NA":
            unresolved_from = x
            continue
        if r[1] == "inf":
            infinite_from = x
            continue
        if r[2] == "inf":
            infinite_from = x
            bp.append(x)
            lv.append(float(r[1]))
            rv.append(float(r[1]))
            continue
        bp.append(x)
        lv.append(float(r[1]))
        rv.append(float(r[2]))
    init = meta.get("initial_value", 0.0)
    if not isinstance(init, (int, float)) or isinstance(init, bool):
        init = 0.0
    return CadlagPath(np.array(bp), np.array(lv), np.array(rv),
                      initial_value=float(init),
                      infinite_from=infinite_from,
                      unresolved_from=unresolved_from), meta


def read_report(file) -> dict:
    if hasattr(file, "read"):
        text = file.read()
    else:
        with open(file) as fh:
            text = fh.read()
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, raw = line.partition("=")
        try:
            out[key] = float(raw)
            if out[key] == math.inf or out[key] == -math.inf:
                out[key] = raw
        except ValueError:
            out[key] = raw
    return out
