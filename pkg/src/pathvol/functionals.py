"""Running-supremum and first-exit functionals, with exit-time limits.

For a continuous path p the two functionals are

    S(p)(t) = sup { p(u) : u in [0, t) }
    E(p)(x) = inf { u > 0 : p(u) > x },   inf of the empty set being +inf.

``running_sup`` returns the exact running maximum of the piecewise-linear
input (inserting the mid-cell node where the path re-crosses its previous
maximum), and ``first_exit`` is computed as the right-continuous inverse of
``running_sup``. Built this way, the identities E(S(p)) = E(p) and
S(S(p)) = S(p) hold exactly, not merely up to grid tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotBijective, OutOfDomain
from .paths import CadlagPath, ContinuousPath, affine

__all__ = ["ExitBarrier", "running_sup", "first_exit", "limit_phi0",
           "limit_generalized"]


@dataclass(frozen=True)
class ExitBarrier:
    """A time-like barrier: a strictly increasing reparametrization of time
    together with a noise scale.
    """

    theta: ContinuousPath
    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")
        if self.theta.values[0] != 0.0:
            raise ValueError("barrier must start at 0")
        if not np.all(np.diff(self.theta.values) > 0.0):
            raise ValueError("barrier must be strictly increasing")

    def theta_inverse(self, levels: np.ndarray) -> np.ndarray:
        return np.interp(levels, self.theta.values, self.theta.grid)


def running_sup(p: ContinuousPath) -> ContinuousPath:
    """Exact running maximum of a piecewise-linear path.

    Within a cell that re-crosses the previous maximum, the crossing node
    is inserted so the result is itself exactly piecewise linear. A
    non-decreasing input comes back with identical grid and values.
    """
    v = p.values
    grid = p.grid
    m = np.maximum.accumulate(v)
    prev = m[:-1]
    crossing = (v[:-1] < prev) & (v[1:] > prev)
    if not np.any(crossing):
        return ContinuousPath(grid, m)
    idx = np.nonzero(crossing)[0]
    frac = (prev[idx] - v[idx]) / (v[idx + 1] - v[idx])
    x_star = grid[idx] + frac * (grid[idx + 1] - grid[idx])
    ok = (x_star > grid[idx]) & (x_star < grid[idx + 1])
    idx, x_star = idx[ok], x_star[ok]
    if idx.size == 0:
        return ContinuousPath(grid, m)
    new_grid = np.insert(grid, idx + 1, x_star)
    new_vals = np.insert(m, idx + 1, m[idx])
    return ContinuousPath(new_grid, new_vals)


def first_exit(p: ContinuousPath, up_to: float | None = None) -> CadlagPath:
    """First time the path strictly exceeds each level, as a cadlag path.

    Flat stretches of the running maximum become jumps; levels the path
    never exceeds on ``[0, up_to]`` are +inf when ``up_to`` is the whole
    domain (the path is taken as given, with nothing beyond it) and are
    marked unresolved when the search was truncated below the domain end.
    Only levels >= 0 are represented.
    """
    horizon = p.domain_end if up_to is None else float(up_to)
    if horizon <= 0.0 or horizon > p.domain_end:
        raise OutOfDomain(f"up_to must lie in (0, {p.domain_end}]")
    truncated = horizon < p.domain_end
    q = p.restrict(horizon) if truncated else p
    s = running_sup(q)

    u, sv = s.grid, s.values
    # maximal runs of equal supremum value: run starts where the value changes
    starts = np.concatenate([[0], np.nonzero(np.diff(sv) != 0.0)[0] + 1])
    ends = np.concatenate([starts[1:] - 1, [sv.size - 1]])
    run_levels = sv[starts]
    run_left = u[starts]
    run_right = u[ends]

    sentinel = max(float(sv[-1]), 0.0)
    if sv[-1] < 0.0:
        # the path never reaches level 0: every represented level is beyond it
        if truncated:
            return CadlagPath([], [], [], unresolved_from=0.0)
        return CadlagPath([], [], [], infinite_from=0.0)

    visible = run_levels >= 0.0
    levels = run_levels[visible]
    left = run_left[visible]
    right = run_right[visible]

    if levels[0] > 0.0:
        if run_levels[0] > 0.0:
            # the path starts above some levels: those are exited immediately
            t0 = 0.0
        else:
            # level 0 is first cleared mid-cell, between the last run below
            # zero and the first one above it
            j = int(np.nonzero(~visible)[0][-1])
            a, b = run_levels[j], run_levels[j + 1]
            ua, ub = run_right[j], run_left[j + 1]
            t0 = float(ua + (0.0 - a) / (b - a) * (ub - ua))
        levels = np.concatenate([[0.0], levels])
        left = np.concatenate([[t0], left])
        right = np.concatenate([[t0], right])

    # the top level is never strictly exceeded: keep its left limit, the
    # value itself lives in the sentinel region
    right = right.copy()
    right[-1] = left[-1]
    if truncated:
        return CadlagPath(levels, left, right, unresolved_from=sentinel)
    return CadlagPath(levels, left, right, infinite_from=sentinel)


def limit_phi0(omega: ContinuousPath, up_to: float) -> CadlagPath:
    """Fast-reversion limit of the time-averaged solution for fixed noise.

    This is the exit-time of x - omega(x), restricted to levels
    ``[0, up_to]``; the noise path is taken as complete, so levels it never
    clears map to +inf.
    """
    drift = affine(omega, -1.0, 0.0, add_identity=True)
    out = first_exit(drift)
    if out.infinite_from is not None and out.infinite_from <= up_to:
        return out
    return out.restrict(up_to)


def limit_generalized(omega: ContinuousPath, barrier: ExitBarrier,
                      up_to: float) -> CadlagPath:
    """Generalized barrier limit: t -> first s with s - sigma*omega(s) > theta(t).

    Reduces to :func:`limit_phi0` for sigma=1 and the identity barrier.
    """
    up_to = float(up_to)
    if up_to <= 0.0 or up_to > barrier.theta.domain_end:
        raise OutOfDomain("up_to must lie inside the barrier's domain")
    drift = affine(omega, -barrier.sigma, 0.0, add_identity=True)
    base = first_exit(drift)

    theta = barrier.theta.restrict(up_to)
    theta_end = float(theta.values[-1])

    inf_from = None
    if base.infinite_from is not None and base.infinite_from <= theta_end:
        inf_from = float(barrier.theta_inverse(np.array([base.infinite_from]))[0])
        finite_top = base.infinite_from
    else:
        finite_top = theta_end

    # breakpoints: exit-curve nodes mapped through theta^{-1}, plus theta's
    # own grid nodes (kinks of the composition)
    base_mask = (base.breakpoints >= theta.values[0]) & (base.breakpoints <= finite_top)
    t_nodes = barrier.theta_inverse(base.breakpoints[base_mask])
    t_grid = theta.grid[theta.values <= finite_top]
    ts = np.unique(np.concatenate([t_nodes, t_grid, [0.0]]))
    if inf_from is not None:
        ts = ts[ts <= inf_from]

    left = np.empty_like(ts)
    right = np.empty_like(ts)
    top = base.infinite_from
    for i, t in enumerate(ts):
        lvl = theta.eval(t)
        if top is not None and lvl >= top:
            # at (or within rounding of) the infinite boundary
            left[i] = base.left_limit(top)
            right[i] = left[i]
        else:
            left[i] = base.left_limit(lvl)
            right[i] = base.eval(lvl)
    return CadlagPath(ts, left, right, infinite_from=inf_from)
