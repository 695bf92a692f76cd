"""Noise trajectory generators with reproducible lazy extension.

A noise trajectory starts at zero and is realized on a uniform grid.
Random kinds (``brownian``, ``fbm``, ``kl_bridge``) draw their variates
from counter-based streams keyed by ``(seed, namespace, chunk)``, so a path
is a pure function of its spec: realizing it in one call or in many
extensions produces bit-identical values, and distinct seeds can be
generated concurrently. Monte Carlo drivers derive per-path seeds as
``(master_seed, path_index)``.

Stochastic kinds realize whole chunks at a time; the realized domain may
therefore extend slightly past the requested point, never short of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_triangular

from .errors import InvalidSpec, NoiseExhausted
from .paths import ContinuousPath
from . import io as pathio

__all__ = ["NoiseSpec", "NoiseStream", "generate", "extend", "derive_rng",
           "path_seed", "stream_from_path"]

KINDS = ("sine", "kl_bridge", "brownian", "fbm", "constant", "identity",
         "custom_table")

# spawn-key namespaces for the counter-based streams
_NS_BROWNIAN = 1
_NS_KL = 2
_NS_FBM = 3

_BROWNIAN_CHUNK = 4096
_FBM_CHUNK = 256
_FBM_MAX_CELLS = 2 ** 14  # exact-covariance construction, desk scale only
_EVAL_CHUNK = 4096


def _entropy(seed) -> tuple[int, ...]:
    if isinstance(seed, (tuple, list)):
        return tuple(int(s) for s in seed)
    return (int(seed),)


def derive_rng(seed, *spawn_key: int) -> np.random.Generator:
    """A Philox stream fully determined by (seed, spawn_key)."""
    ss = np.random.SeedSequence(entropy=_entropy(seed), spawn_key=tuple(spawn_key))
    return np.random.Generator(np.random.Philox(ss))


def path_seed(master_seed: int | tuple, index: int) -> tuple[int, ...]:
    """Per-path seed convention for Monte Carlo ensembles."""
    return _entropy(master_seed) + (int(index),)


@dataclass(frozen=True)
class NoiseSpec:
    """Parameters of a noise trajectory.

    ``step`` is the grid spacing. Kind-specific fields: ``amplitude`` and
    ``frequency`` (cycles per unit) for ``sine``, which produces
    -amplitude*sin(2*pi*frequency*x); ``terms`` for the truncated
    Brownian-bridge sine series ``kl_bridge``; ``hurst`` for ``fbm``;
    ``table`` for ``custom_table`` (a two-column CSV whose first row must
    be ``0,0``).
    """

    kind: str
    step: float = 2.0 ** -10
    seed: int | tuple[int, ...] = 0
    amplitude: float = 1.0 / 6.0
    frequency: float = 3.0
    terms: int = 64
    hurst: float = 0.5
    table: str | None = None

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown noise kind {self.kind!r}")
        if self.step <= 0.0:
            raise InvalidSpec("step must be positive")
        if self.kind == "fbm" and not 0.0 < self.hurst < 1.0:
            raise InvalidSpec("hurst must lie in (0, 1)")
        if self.kind == "kl_bridge" and self.terms < 1:
            raise InvalidSpec("kl_bridge needs at least one term")
        if self.kind == "custom_table" and self.table is None:
            raise InvalidSpec("custom_table needs a table file")

    @property
    def extendable(self) -> bool:
        return self.kind != "custom_table"


@dataclass(frozen=True)
class NoiseStream:
    """A noise spec together with its realized prefix.

    Extension never changes already-realized values.
    """

    spec: NoiseSpec
    realized: ContinuousPath
    _state: tuple = ()

    @property
    def domain_end(self) -> float:
        return self.realized.domain_end

    def eval(self, x):
        return self.realized.eval(x)

    @property
    def path(self) -> ContinuousPath:
        return self.realized


def _grid(step: float, n_cells: int) -> np.ndarray:
    return np.arange(n_cells + 1) * step


def _n_cells(step: float, to_x: float) -> int:
    return max(1, int(math.ceil(to_x / step - 1e-12)))


def _sine_values(spec: NoiseSpec, grid: np.ndarray) -> np.ndarray:
    return -spec.amplitude * np.sin((2.0 * math.pi * spec.frequency) * grid)


def _kl_values(xi: np.ndarray, grid: np.ndarray) -> np.ndarray:
    k = np.arange(1, xi.size + 1)
    coeff = xi / (k * math.pi)
    out = np.empty_like(grid)
    # fixed-size blocks keep the prefix bitwise stable under extension
    for a in range(0, grid.size, _EVAL_CHUNK):
        block = grid[a:a + _EVAL_CHUNK]
        out[a:a + _EVAL_CHUNK] = np.sin(np.outer(block, k * math.pi)) @ coeff
    return out


def _brownian_cells(spec: NoiseSpec, n_cells: int) -> int:
    return int(math.ceil(n_cells / _BROWNIAN_CHUNK)) * _BROWNIAN_CHUNK


def _brownian_values(spec: NoiseSpec, old: np.ndarray | None, n_cells: int) -> np.ndarray:
    """Whole-chunk Brownian node values; ``old`` is a realized prefix."""
    scale = math.sqrt(spec.step)
    values = np.empty(n_cells + 1)
    if old is None:
        values[0] = 0.0
        start = 0
    else:
        values[: old.size] = old
        start = old.size - 1
    anchor = values[start]
    for c in range(start // _BROWNIAN_CHUNK, n_cells // _BROWNIAN_CHUNK):
        rng = derive_rng(spec.seed, _NS_BROWNIAN, c)
        incs = rng.standard_normal(_BROWNIAN_CHUNK) * scale
        lo = c * _BROWNIAN_CHUNK
        values[lo + 1: lo + 1 + _BROWNIAN_CHUNK] = anchor + np.cumsum(incs)
        anchor = values[lo + _BROWNIAN_CHUNK]
    return values


def _fbm_gamma(h: float, step: float, lags: np.ndarray) -> np.ndarray:
    """Autocovariance of fractional Gaussian increments at the given lags."""
    k = np.abs(lags).astype(float)
    return 0.5 * step ** (2.0 * h) * (
        np.abs(k + 1.0) ** (2.0 * h) + np.abs(k - 1.0) ** (2.0 * h) - 2.0 * k ** (2.0 * h)
    )


def _fbm_extend(spec: NoiseSpec, state: tuple, n_cells: int):
    """Grow the Cholesky factor and draw new increments conditionally."""
    n_cells = int(math.ceil(n_cells / _FBM_CHUNK)) * _FBM_CHUNK
    if n_cells > _FBM_MAX_CELLS:
        raise NoiseExhausted(
            f"fbm generation capped at {_FBM_MAX_CELLS} grid cells"
        )
    if state:
        chol, z, incs = state
        n_old = z.size
    else:
        chol = np.zeros((0, 0))
        z = np.zeros(0)
        incs = np.zeros(0)
        n_old = 0
    for c in range(n_old // _FBM_CHUNK, n_cells // _FBM_CHUNK):
        m = _FBM_CHUNK
        n = c * _FBM_CHUNK
        rng = derive_rng(spec.seed, _NS_FBM, c)
        z_new = rng.standard_normal(m)
        rows = np.arange(n, n + m)
        c22 = _fbm_gamma(spec.hurst, spec.step, rows[:, None] - rows[None, :])
        if n == 0:
            l22 = np.linalg.cholesky(c22)
            chol = l22
            d_new = l22 @ z_new
        else:
            c12 = _fbm_gamma(spec.hurst, spec.step,
                             np.arange(n)[:, None] - rows[None, :])
            l21 = solve_triangular(chol, c12, lower=True).T
            l22 = np.linalg.cholesky(c22 - l21 @ l21.T)
            chol = np.block([
                [chol, np.zeros((n, m))],
                [l21, l22],
            ])
            d_new = l21 @ z[:n] + l22 @ z_new
        z = np.concatenate([z, z_new])
        incs = np.concatenate([incs, d_new])
    values = np.concatenate([[0.0], np.cumsum(incs)])
    return values, (chol, z, incs)


def _load_table(table: str) -> ContinuousPath:
    try:
        path, _ = pathio.read_continuous(table)
    except ValueError:
        grid = []
        vals = []
        with open(table) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                x, v = line.split(",")[:2]
                grid.append(float(x))
                vals.append(float(v))
        path = ContinuousPath(np.array(grid), np.array(vals))
    if path.grid[0] != 0.0 or path.values[0] != 0.0:
        raise InvalidSpec("custom table must start with the row 0,0")
    return path


def _realize(spec: NoiseSpec, n_cells: int, stream: NoiseStream | None) -> NoiseStream:
    state: tuple = stream._state if stream is not None else ()
    if spec.kind == "constant":
        grid = _grid(spec.step, n_cells)
        return NoiseStream(spec, ContinuousPath(grid, np.zeros_like(grid)), state)
    if spec.kind == "identity":
        grid = _grid(spec.step, n_cells)
        return NoiseStream(spec, ContinuousPath(grid, grid.copy()), state)
    if spec.kind == "sine":
        grid = _grid(spec.step, n_cells)
        return NoiseStream(spec, ContinuousPath(grid, _sine_values(spec, grid)), state)
    if spec.kind == "kl_bridge":
        if state:
            xi = state[0]
        else:
            xi = derive_rng(spec.seed, _NS_KL, 0).standard_normal(spec.terms)
        grid = _grid(spec.step, n_cells)
        return NoiseStream(spec, ContinuousPath(grid, _kl_values(xi, grid)), (xi,))
    if spec.kind == "brownian":
        n_cells = _brownian_cells(spec, n_cells)
        old = stream.realized.values if stream is not None else None
        values = _brownian_values(spec, old, n_cells)
        return NoiseStream(spec, ContinuousPath(_grid(spec.step, n_cells), values), state)
    if spec.kind == "fbm":
        values, new_state = _fbm_extend(spec, state, n_cells)
        n_done = values.size - 1
        return NoiseStream(spec, ContinuousPath(_grid(spec.step, n_done), values), new_state)
    raise InvalidSpec(f"unknown noise kind {spec.kind!r}")


def generate(spec: NoiseSpec, to_x: float) -> NoiseStream:
    """Realize a fresh stream on at least ``[0, to_x]``."""
    spec.validate()
    if to_x <= 0.0:
        raise InvalidSpec("to_x must be positive")
    if spec.kind == "custom_table":
        path = _load_table(spec.table)
        if path.domain_end < to_x:
            raise NoiseExhausted(
                f"table covers [0, {path.domain_end}], needed [0, {to_x}]"
            )
        return NoiseStream(spec, path)
    return _realize(spec, _n_cells(spec.step, to_x), None)


def extend(stream: NoiseStream, to_x: float) -> NoiseStream:
    """Extend the realized domain to cover ``to_x``; no-op if covered.

    Previously realized values are unchanged (and for the Brownian kind,
    bit-identical to a single-shot generation over the larger domain).
    """
    if to_x <= stream.domain_end:
        return stream
    if not stream.spec.extendable:
        raise NoiseExhausted(
            f"table noise ends at {stream.domain_end}, needed {to_x}"
        )
    return _realize(stream.spec, _n_cells(stream.spec.step, to_x), stream)


def stream_from_path(path: ContinuousPath) -> NoiseStream:
    """Wrap a fixed trajectory as a non-extendable stream."""
    spec = NoiseSpec(kind="custom_table", step=float(path.grid[1] - path.grid[0]),
                     table="<in-memory>")
    return NoiseStream(spec, path)
