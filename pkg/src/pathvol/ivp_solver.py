"""Forward Euler solution of the square-root-volatility initial-value problem.

The canonical problem, for reversionary timescale eps and noise trajectory
omega, is

    x'(t) = (omega(x) + t - x) / eps + 1,   x(0) = 0,

whose solution phi is the time-averaged volatility trajectory and whose
derivative phi' is the volatility itself. The generalized form replaces
omega by sigma*omega, t by a time-like barrier theta(t), and the additive
constant 1 by a start level v.

The scheme is plain forward Euler, the one whose convergence to the unique
solution is guaranteed for merely-continuous noise; no implicit or
higher-order scheme is used, and overshoots past the barrier region are
reported rather than clipped. Noise is drawn lazily: the trajectory is
extended only when the iterate approaches its realized end.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, NonFiniteState, NotBijective, RangeExceedsDomain
from .functionals import ExitBarrier, running_sup
from .noise import NoiseStream, extend, stream_from_path
from .paths import ContinuousPath, affine

__all__ = ["IvpConfig", "IvpSolution", "BoundReport", "CompositeSeries",
           "solve", "bound_check", "recover_noise", "composite_series"]

_MIN_EPSILON = 2.0 ** -20
_ENVELOPE_DELTA = 2.0 ** -40


@dataclass(frozen=True)
class IvpConfig:
    """Solver configuration.

    ``step`` must not exceed ``epsilon/4``: the linearized drift relaxes at
    rate 1/epsilon, and forward Euler needs a comfortable margin below the
    2*epsilon oscillation threshold. Timescales below 2^-20 are rejected;
    at that point the exact exit-time limit is the right tool, not the ODE.
    """

    epsilon: float
    step: float
    horizon: float
    barrier: ExitBarrier | None = None
    v: float = 1.0
    x_stop: float | None = None

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise InvalidConfig("epsilon must be positive")
        if self.epsilon < _MIN_EPSILON:
            raise InvalidConfig(
                f"epsilon below {_MIN_EPSILON} is degenerate; use the exit-time limit"
            )
        if not self.step > 0.0:
            raise InvalidConfig("step must be positive")
        if self.step > self.epsilon / 4.0:
            raise InvalidConfig("step must satisfy step <= epsilon/4 for stability")
        if not self.horizon > 0.0:
            raise InvalidConfig("horizon must be positive")
        if self.v < 0.0:
            raise InvalidConfig("start level v must be non-negative")
        if self.x_stop is not None and self.x_stop <= 0.0:
            raise InvalidConfig("x_stop must be positive")


@dataclass(frozen=True)
class IvpSolution:
    """Paired time-average / volatility series and the space-indexed inverse.

    ``phi`` is non-decreasing with phi(0) = 0 up to Euler overshoot;
    ``phi_hat`` is the strictly-increasing envelope of (phi, t) read as a
    function of space, so phi(phi_hat(x)) = x within grid tolerance.
    """

    phi: ContinuousPath
    phi_prime: ContinuousPath
    phi_hat: ContinuousPath
    T_reached: float

    @property
    def min_slope(self) -> float:
        """Smallest sampled volatility value (negative only by overshoot)."""
        return float(self.phi_prime.values.min())


class _LazyEval:
    """Fast scalar interpolation over a lazily extended noise stream."""

    def __init__(self, stream: NoiseStream):
        self._rebind(stream)

    def _rebind(self, stream: NoiseStream) -> None:
        self.stream = stream
        grid = stream.realized.grid
        self.end = float(grid[-1])
        self.vals = stream.realized.values.tolist()
        self.xs = None
        if grid.size > 1:
            d = np.diff(grid)
            step = float(d[0])
            if np.max(np.abs(d - step)) <= 1e-12 * step:
                self.step = step
                self.inv_step = 1.0 / step
                self.n = grid.size - 1
                return
        self.xs = grid.tolist()
        self.step = None

    def at(self, x: float) -> float:
        while x > self.end:
            grow = max(x, self.end + max(1.0, self.end))
            self._rebind(extend(self.stream, grow))
        if self.step is not None:
            pos = x * self.inv_step
            i = int(pos)
            if i >= self.n:
                i = self.n - 1
            frac = pos - i
            v = self.vals
            return v[i] * (1.0 - frac) + v[i + 1] * frac
        i = bisect.bisect_right(self.xs, x) - 1
        if i >= len(self.xs) - 1:
            i = len(self.xs) - 2
        x0, x1 = self.xs[i], self.xs[i + 1]
        v = self.vals
        return v[i] + (x - x0) * (v[i + 1] - v[i]) / (x1 - x0)


def solve(noise: NoiseStream | ContinuousPath, cfg: IvpConfig) -> IvpSolution:
    """Forward Euler iterates x_{n+1} = x_n + h*f(t_n, x_n) from the origin.

    The noise trajectory is evaluated at max(x, 0): exact solutions stay
    non-negative, but a coarse step can overshoot transiently below zero,
    where the drift immediately pushes back up. Stops at the horizon or at
    ``x_stop``, whichever comes first.
    """
    if isinstance(noise, ContinuousPath):
        noise = stream_from_path(noise)
    omega = _LazyEval(noise)
    eps = cfg.epsilon
    h = cfg.step
    horizon = cfg.horizon
    v_const = cfg.v
    x_stop = cfg.x_stop

    if cfg.barrier is not None:
        if cfg.barrier.theta.domain_end < horizon:
            raise InvalidConfig("barrier does not cover the solve horizon")
        sigma = cfg.barrier.sigma
        th_grid = cfg.barrier.theta.grid.tolist()
        th_vals = cfg.barrier.theta.values.tolist()

        def theta_at(t: float) -> float:
            i = min(bisect.bisect_right(th_grid, t) - 1, len(th_grid) - 2)
            t0, t1 = th_grid[i], th_grid[i + 1]
            return th_vals[i] + (t - t0) * (th_vals[i + 1] - th_vals[i]) / (t1 - t0)
    else:
        sigma = 1.0
        theta_at = None

    ts = [0.0]
    xs = [0.0]
    fs = []
    t = 0.0
    x = 0.0
    while True:
        w = omega.at(x if x > 0.0 else 0.0)
        th = t if theta_at is None else theta_at(t)
        f = (sigma * w + th - x) / eps + v_const
        fs.append(f)
        if not (math.isfinite(f) and math.isfinite(x)):
            raise NonFiniteState(f"iterate left the finite range at t={t}")
        if t >= horizon:
            break
        if x_stop is not None and x >= x_stop:
            break
        h_n = h if t + h <= horizon else horizon - t
        x = x + h_n * f
        t = t + h_n
        ts.append(t)
        xs.append(x)

    t_arr = np.array(ts)
    x_arr = np.array(xs)
    f_arr = np.array(fs)
    phi = ContinuousPath(t_arr, x_arr)
    phi_prime = ContinuousPath(t_arr, f_arr)
    phi_hat = _inverse_envelope(t_arr, x_arr)
    return IvpSolution(phi=phi, phi_prime=phi_prime, phi_hat=phi_hat,
                       T_reached=float(t_arr[-1]))


def _inverse_envelope(t_arr: np.ndarray, x_arr: np.ndarray) -> ContinuousPath:
    """Strictly-increasing envelope of the iterates, space-indexed.

    Nodes where x fails to increase by a machine-scale margin are dropped;
    the solution is bijective with at most countably many flat points, so
    nothing of substance is lost.
    """
    prev_max = np.maximum.accumulate(x_arr)[:-1]
    keep = np.empty(x_arr.size, dtype=bool)
    keep[0] = True
    keep[1:] = x_arr[1:] > prev_max + _ENVELOPE_DELTA * np.maximum(1.0, prev_max)
    return ContinuousPath(x_arr[keep], t_arr[keep])


@dataclass(frozen=True)
class BoundReport:
    """Worst-case comparison of the inverse solution against its envelope.

    ``uniform_gap`` is the sup-norm distance between the inverse and the
    running supremum of x - omega(x) over the checked space range; the
    lower/upper violations measure how far the inverse escapes the band
    [sup - eps, sup + 2*sqrt(x*eps)] (0 when it stays inside).
    """

    max_lower_violation: float
    max_upper_violation: float
    uniform_gap: float
    x_max: float

    def as_dict(self) -> dict:
        return {
            "max_lower_violation": self.max_lower_violation,
            "max_upper_violation": self.max_upper_violation,
            "uniform_gap": self.uniform_gap,
            "x_max": self.x_max,
        }

    def lines(self) -> str:
        return "\n".join(f"{k}={v!r}" for k, v in self.as_dict().items())


def bound_check(sol: IvpSolution, omega: ContinuousPath, eps: float,
                x_max: float | None = None) -> BoundReport:
    """Check the inverse solution against its exit-time band."""
    hat = sol.phi_hat
    top = min(hat.domain_end, omega.domain_end)
    if x_max is not None:
        top = min(top, float(x_max))
    mask = hat.grid <= top
    xs = hat.grid[mask]
    hat_vals = hat.values[mask]
    sup = running_sup(affine(omega, -1.0, 0.0, add_identity=True))
    base = sup.eval(xs)
    lower = base - eps
    upper = base + 2.0 * np.sqrt(xs * eps)
    return BoundReport(
        max_lower_violation=float(np.max(lower - hat_vals, initial=0.0)),
        max_upper_violation=float(np.max(hat_vals - upper, initial=0.0)),
        uniform_gap=float(np.max(np.abs(hat_vals - base), initial=0.0)),
        x_max=float(xs[-1]) if xs.size else 0.0,
    )


def recover_noise(phi: ContinuousPath, eps: float) -> ContinuousPath:
    """The unique noise trajectory for which ``phi`` solves the problem.

    Inverts the solution map: with phi_hat the inverse of phi,

        omega(x) = x - phi_hat(x) + eps*(1/phi_hat'(x) - 1).

    The derivative is estimated by second-order differences on the
    (generally non-uniform) space grid.
    """
    if eps <= 0.0:
        raise InvalidConfig("eps must be positive")
    t = phi.grid
    x = phi.values
    if x[0] != 0.0:
        raise NotBijective("phi must start at 0")
    dx = np.diff(x)
    if np.any(dx <= _ENVELOPE_DELTA * np.maximum(1.0, np.abs(x[:-1]))):
        raise NotBijective("phi must be strictly increasing")
    d_hat = np.gradient(t, x, edge_order=2)
    if np.any(d_hat <= 0.0):
        raise NotBijective("inverse derivative must stay positive")
    omega_vals = x - t + eps * (1.0 / d_hat - 1.0)
    return ContinuousPath(x, omega_vals)


@dataclass(frozen=True)
class CompositeSeries:
    """Derived series on the solution's time grid."""

    eps_phi_prime: ContinuousPath
    omega_circ_phi_plus_e: ContinuousPath
    log_heston: ContinuousPath | None = None


def composite_series(sol: IvpSolution, omega: ContinuousPath, eps: float,
                     omega_bar: ContinuousPath | None = None) -> CompositeSeries:
    """Scaled volatility, noise-through-solution and log-price composites.

    ``eps*phi'`` and ``omega(phi) + t`` always; the log-price composite
    ``omega_bar(phi) - omega(phi) - phi`` only when a second trajectory is
    supplied. Raises RangeExceedsDomain when the solution runs past the
    noise domain.
    """
    grid = sol.phi.grid
    eps_phi_prime = affine(sol.phi_prime, eps, 0.0)
    # interpolate directly: Euler iterates may dip below monotone by a
    # rounding-scale overshoot, which the strict compose() would reject
    positions = np.maximum(sol.phi.values, 0.0)
    if positions.max() > omega.domain_end:
        raise RangeExceedsDomain(
            f"solution reaches {positions.max()}, noise ends at {omega.domain_end}"
        )
    ocp = np.interp(positions, omega.grid, omega.values)
    plus_e = ContinuousPath(grid, ocp + grid)
    log_heston = None
    if omega_bar is not None:
        if positions.max() > omega_bar.domain_end:
            raise RangeExceedsDomain(
                f"solution reaches {positions.max()}, second noise ends at "
                f"{omega_bar.domain_end}"
            )
        bar = np.interp(positions, omega_bar.grid, omega_bar.values)
        log_heston = ContinuousPath(grid, bar - ocp - sol.phi.values)
    return CompositeSeries(eps_phi_prime=eps_phi_prime,
                           omega_circ_phi_plus_e=plus_e,
                           log_heston=log_heston)
