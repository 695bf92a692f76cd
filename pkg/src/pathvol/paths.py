"""Grid-backed path types: continuous trajectories and cadlag exit-time curves.

Continuous trajectories are stored as samples on an explicit grid and
evaluated by piecewise-linear interpolation; interpolation preserves
continuity and monotonicity, which is all downstream code relies on.
Non-decreasing cadlag curves (outputs of the exit-time functional) store
their breakpoints explicitly, with one-sided values at each breakpoint, so
jump locations are exact rather than sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotBijective, OutOfDomain, RangeExceedsDomain, UnresolvedLevel

__all__ = [
    "ContinuousPath",
    "CadlagPath",
    "identity_path",
    "zero_path",
    "affine",
    "compose",
]


def _as_readonly(a) -> np.ndarray:
    out = np.asarray(a, dtype=float)
    if out.ndim != 1:
        raise ValueError("path arrays must be one-dimensional")
    out = out.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ContinuousPath:
    """A continuous trajectory sampled on a strictly increasing grid.

    The grid starts at 0. Evaluation between nodes is the piecewise-linear
    interpolant; evaluation outside ``[0, domain_end]`` raises
    :class:`OutOfDomain` rather than extrapolating.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = _as_readonly(self.grid)
        values = _as_readonly(self.values)
        if grid.size < 2:
            raise ValueError("a path needs at least two grid nodes")
        if grid[0] != 0.0:
            raise ValueError("grid must start at 0")
        if not np.all(np.diff(grid) > 0.0):
            raise ValueError("grid must be strictly increasing")
        if values.size != grid.size:
            raise ValueError("values and grid must have the same length")
        if not np.all(np.isfinite(values)):
            raise ValueError("path values must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def domain_end(self) -> float:
        return float(self.grid[-1])

    def __len__(self) -> int:
        return int(self.grid.size)

    def eval(self, x):
        """Evaluate at a scalar or array of abscissae inside the domain."""
        xs = np.asarray(x, dtype=float)
        if np.any(xs < 0.0) or np.any(xs > self.grid[-1]):
            raise OutOfDomain(
                f"evaluation at {x!r} outside [0, {self.domain_end}]"
            )
        out = np.interp(xs, self.grid, self.values)
        if np.isscalar(x) or xs.ndim == 0:
            return float(out)
        return out

    def __call__(self, x):
        return self.eval(x)

    def restrict(self, to_x: float) -> "ContinuousPath":
        """Truncate the domain to ``[0, to_x]``, interpolating the end node."""
        if to_x <= 0.0 or to_x > self.domain_end:
            raise OutOfDomain(f"cannot restrict to [0, {to_x}]")
        if to_x == self.domain_end:
            return self
        k = int(np.searchsorted(self.grid, to_x, side="left"))
        if self.grid[k] == to_x:
            return ContinuousPath(self.grid[: k + 1], self.values[: k + 1])
        grid = np.append(self.grid[:k], to_x)
        values = np.append(self.values[:k], self.eval(to_x))
        return ContinuousPath(grid, values)

    def is_non_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) >= 0.0))


def identity_path(end: float, n: int = 2) -> ContinuousPath:
    """The identity trajectory x -> x on ``[0, end]``."""
    if end <= 0.0:
        raise ValueError("end must be positive")
    grid = np.linspace(0.0, end, max(int(n), 2))
    return ContinuousPath(grid, grid)


def zero_path(end: float, n: int = 2) -> ContinuousPath:
    """The zero trajectory on ``[0, end]``."""
    if end <= 0.0:
        raise ValueError("end must be positive")
    grid = np.linspace(0.0, end, max(int(n), 2))
    return ContinuousPath(grid, np.zeros_like(grid))


def affine(p: ContinuousPath, a: float, b: float, add_identity: bool = False) -> ContinuousPath:
    """Pointwise ``a*p(x) + b`` on p's grid, plus ``x`` when ``add_identity``.

    With ``a=-1, add_identity=True`` this builds the drift-adjusted trajectory
    x - p(x) used throughout the exit-time analysis.
    """
    values = a * p.values + b
    if add_identity:
        values = values + p.grid
    return ContinuousPath(p.grid, values)


def compose(outer: ContinuousPath, inner: ContinuousPath) -> ContinuousPath:
    """The composition ``outer(inner(.))`` on inner's grid.

    ``inner`` must be non-decreasing and its range must sit inside
    ``outer``'s domain.
    """
    if not inner.is_non_decreasing():
        raise NotBijective("inner path must be non-decreasing for composition")
    lo = float(inner.values[0] if inner.values[0] <= inner.values[-1] else inner.values.min())
    hi = float(inner.values.max())
    if lo < 0.0 or hi > outer.domain_end:
        raise RangeExceedsDomain(
            f"inner range [{lo}, {hi}] exceeds outer domain [0, {outer.domain_end}]"
        )
    return ContinuousPath(inner.grid, np.interp(inner.values, outer.grid, outer.values))


@dataclass(frozen=True)
class CadlagPath:
    """A non-decreasing right-continuous path with explicit breakpoints.

    Each breakpoint carries a left and a right value; the path jumps where
    they differ and is linearly interpolated between consecutive
    breakpoints (from the right value of one to the left value of the
    next). The value *at* a breakpoint is its right value.

    Infinity is never stored in the arrays. ``infinite_from`` marks the
    abscissa from which the path is +inf (evaluation returns ``math.inf``);
    a breakpoint exactly at ``infinite_from`` records the finite left
    limit. ``unresolved_from`` marks levels whose exit lies beyond the
    realized extent of the underlying path, where no value (finite or
    infinite) can be reported yet.
    """

    breakpoints: np.ndarray
    left_values: np.ndarray
    right_values: np.ndarray
    initial_value: float = 0.0
    infinite_from: float | None = None
    unresolved_from: float | None = None

    def __post_init__(self):
        bp = _as_readonly(self.breakpoints)
        lv = _as_readonly(self.left_values)
        rv = _as_readonly(self.right_values)
        if not (bp.size == lv.size == rv.size):
            raise ValueError("breakpoint arrays must have equal length")
        if bp.size == 0:
            if self.infinite_from is None and self.unresolved_from is None:
                raise ValueError("an empty cadlag path needs a sentinel")
        else:
            if bp[0] < 0.0:
                raise ValueError("breakpoints must start at or after 0")
            if not np.all(np.diff(bp) > 0.0):
                raise ValueError("breakpoints must be strictly increasing")
            if np.any(lv > rv) or np.any(rv[:-1] > lv[1:]):
                raise ValueError("cadlag path must be non-decreasing")
            if self.infinite_from is not None and bp[-1] > self.infinite_from:
                raise ValueError("no finite values may be stored beyond infinite_from")
            if self.unresolved_from is not None and bp[-1] > self.unresolved_from:
                raise ValueError("no values may be stored beyond unresolved_from")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "left_values", lv)
        object.__setattr__(self, "right_values", rv)
        if bp.size and bp[0] == 0.0:
            object.__setattr__(self, "initial_value", float(rv[0]))

    @property
    def finite_level_end(self) -> float:
        """Largest abscissa with a stored (finite) breakpoint."""
        if self.breakpoints.size == 0:
            return 0.0
        return float(self.breakpoints[-1])

    def eval(self, x: float) -> float:
        """Right-continuous evaluation; +inf inside the infinite region."""
        x = float(x)
        if x < 0.0:
            raise OutOfDomain(f"evaluation at {x} below 0")
        if self.unresolved_from is not None and x >= self.unresolved_from:
            raise UnresolvedLevel(
                f"exit at level {x} undetermined beyond {self.unresolved_from}"
            )
        if self.infinite_from is not None and x >= self.infinite_from:
            return math.inf
        bp = self.breakpoints
        if bp.size == 0 or x > bp[-1]:
            raise OutOfDomain(f"evaluation at {x} beyond stored breakpoints")
        i = int(np.searchsorted(bp, x, side="right")) - 1
        if i < 0:
            # before the first breakpoint: linear from the initial value
            x0, y0 = 0.0, self.initial_value
            x1, y1 = float(bp[0]), float(self.left_values[0])
        elif bp[i] == x:
            return float(self.right_values[i])
        else:
            x0, y0 = float(bp[i]), float(self.right_values[i])
            x1, y1 = float(bp[i + 1]), float(self.left_values[i + 1])
        if x1 == x0:
            return y1
        return y0 + (x - x0) * (y1 - y0) / (x1 - x0)

    def __call__(self, x: float) -> float:
        return self.eval(x)

    def left_limit(self, x: float) -> float:
        """Left limit at ``x`` (equals eval except at jump breakpoints)."""
        x = float(x)
        bp = self.breakpoints
        i = int(np.searchsorted(bp, x, side="left"))
        if i < bp.size and bp[i] == x:
            return float(self.left_values[i])
        return self.eval(x)

    def jumps(self):
        """Breakpoints with a genuine jump, as (levels, sizes) arrays."""
        sizes = self.right_values - self.left_values
        mask = sizes > 0.0
        return self.breakpoints[mask], sizes[mask]

    def is_finite_at(self, x: float) -> bool:
        if self.unresolved_from is not None and x >= self.unresolved_from:
            return False
        if self.infinite_from is not None and x >= self.infinite_from:
            return False
        return True

    def restrict(self, up_to: float) -> "CadlagPath":
        """Truncate the level domain to ``[0, up_to]``."""
        up_to = float(up_to)
        if up_to <= 0.0:
            raise OutOfDomain("up_to must be positive")
        if self.unresolved_from is not None and up_to >= self.unresolved_from:
            keep = self.breakpoints <= self.unresolved_from
            return CadlagPath(
                self.breakpoints[keep],
                self.left_values[keep],
                self.right_values[keep],
                initial_value=self.initial_value,
                unresolved_from=self.unresolved_from,
            )
        if self.infinite_from is not None and up_to >= self.infinite_from:
            keep = self.breakpoints <= self.infinite_from
            return CadlagPath(
                self.breakpoints[keep],
                self.left_values[keep],
                self.right_values[keep],
                initial_value=self.initial_value,
                infinite_from=self.infinite_from,
            )
        keep = self.breakpoints <= up_to
        bp = self.breakpoints[keep]
        lv = self.left_values[keep]
        rv = self.right_values[keep]
        if bp.size == 0 or bp[-1] < up_to:
            end_val = self.eval(up_to)
            bp = np.append(bp, up_to)
            lv = np.append(lv, end_val)
            rv = np.append(rv, end_val)
        return CadlagPath(bp, lv, rv, initial_value=self.initial_value)
