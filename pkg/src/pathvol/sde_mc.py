"""Monte Carlo engines for the mean-reverting square-root family.

``simulate_cir`` runs full-truncation Euler-Maruyama for

    dV = sigma * kappa^beta * sqrt(V) dW + kappa(vartheta - V) dt,  V_0 = v,

with kappa = 1/epsilon and the running time-average accumulated by the
trapezoid rule on the truncated values. ``simulate_ou`` steps the
mean-reverting Gaussian companion process exactly in distribution, jointly
with the driving Brownian path, to monitor how fast its time-average
approaches that path. ``ivp_terminal_ensemble`` solves the pathwise
initial-value problem over an ensemble of Brownian noise trajectories, for
distributional comparison against the square-root SDE.

Every path owns a counter-based stream keyed by (master_seed, path_index),
and reductions happen on index-ordered arrays, so ensemble statistics are
bit-identical across runs and across worker counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import log_ndtr, ndtr

from .errors import DomainError, EmptySample, InvalidConfig
from .functionals import first_exit
from .noise import derive_rng, path_seed
from .paths import CadlagPath, ContinuousPath

__all__ = ["SdeConfig", "McEnsemble", "IgParams", "simulate_cir", "simulate_ou",
           "ivp_terminal_ensemble", "exit_time_process", "ig_cdf", "ig_sample",
           "ks_distance", "ks_two_sample"]

_NS_CIR = 11
_NS_OU = 12
_NS_IG = 13
_NS_IVP_NOISE = 14

_BLOCK = 1024
_IVP_BLOCK = 512
_IVP_NOISE_CHUNK = 512

_BETAS = (0.0, 0.5, 1.0)


@dataclass(frozen=True)
class SdeConfig:
    """Simulation parameters for the square-root family.

    ``beta`` selects the volatility-of-volatility regime (effective
    diffusion coefficient sigma * kappa^beta); the scheme needs
    ``step <= epsilon/4`` like the deterministic solver.
    """

    epsilon: float
    step: float
    horizon: float
    n_paths: int
    beta: float = 1.0
    sigma: float = 1.0
    vartheta: float = 1.0
    v: float = 1.0
    master_seed: int | tuple = 0
    store_paths: int = 0
    zero_noise: bool = False

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise InvalidConfig("epsilon must be positive")
        if self.beta not in _BETAS:
            raise InvalidConfig(f"beta must be one of {_BETAS}")
        if not self.step > 0.0:
            raise InvalidConfig("step must be positive")
        if self.step > self.epsilon / 4.0:
            raise InvalidConfig("step must satisfy step <= epsilon/4")
        if not self.horizon > 0.0:
            raise InvalidConfig("horizon must be positive")
        if self.n_paths < 1:
            raise InvalidConfig("need at least one path")
        if self.sigma <= 0.0 or self.vartheta <= 0.0 or self.v < 0.0:
            raise InvalidConfig("coefficients must be positive (v non-negative)")
        if self.store_paths < 0:
            raise InvalidConfig("store_paths must be non-negative")

    @property
    def kappa(self) -> float:
        return 1.0 / self.epsilon

    @property
    def sigma_eff(self) -> float:
        return self.sigma * self.kappa ** self.beta


@dataclass(frozen=True)
class McEnsemble:
    """Per-path terminal records plus optional stored trajectories."""

    master_seed: int | tuple
    terminal_v: np.ndarray
    terminal_vbar: np.ndarray
    extra: dict = field(default_factory=dict)
    paths: tuple = ()
    vbar_paths: tuple = ()

    @property
    def n_paths(self) -> int:
        return int(self.terminal_v.size)

    def seed_for(self, index: int) -> tuple:
        return path_seed(self.master_seed, index)

    def summary(self) -> dict:
        out = {
            "n": self.n_paths,
            "mean_v": float(np.mean(self.terminal_v)),
            "var_v": float(np.var(self.terminal_v, ddof=1)),
            "mean_vbar": float(np.mean(self.terminal_vbar)),
            "var_vbar": float(np.var(self.terminal_vbar, ddof=1)),
        }
        for key, arr in self.extra.items():
            out[f"mean_{key}"] = float(np.mean(arr))
            out[f"max_{key}"] = float(np.max(arr))
        return out


def _step_sizes(step: float, horizon: float) -> np.ndarray:
    k = int(math.floor(horizon / step + 1e-9))
    rem = horizon - k * step
    if rem > 1e-12 * max(1.0, horizon):
        return np.concatenate([np.full(k, step), [rem]])
    return np.full(max(k, 1), step)


def _normal_rows(master_seed, ns: int, lo: int, hi: int, n_vars: int,
                 zero_noise: bool) -> np.ndarray:
    if zero_noise:
        return np.zeros((hi - lo, n_vars))
    out = np.empty((hi - lo, n_vars))
    for i in range(lo, hi):
        rng = derive_rng(path_seed(master_seed, i), ns)
        out[i - lo] = rng.standard_normal(n_vars)
    return out


def _run_blocks(n_paths: int, block: int, threads: int, work) -> None:
    ranges = [(lo, min(lo + block, n_paths)) for lo in range(0, n_paths, block)]
    if threads <= 1:
        for lo, hi in ranges:
            work(lo, hi)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(lambda r: work(*r), ranges))


def simulate_cir(cfg: SdeConfig, threads: int = 1) -> McEnsemble:
    """Full-truncation Euler-Maruyama ensemble of the square-root SDE.

    Both the diffusion and the drift read the truncated state max(V, 0),
    and the reported value process is the truncated state itself; the
    auxiliary state may dip below zero, where the diffusion switches off
    and the drift pulls back at the full reversion rate. Leaving the drift
    on the raw state roughly doubles the time-average variance at coarse
    steps in the fast-reversion regime.
    """
    hs = _step_sizes(cfg.step, cfg.horizon)
    sqrt_hs = np.sqrt(hs)
    kap = cfg.kappa
    sig = cfg.sigma_eff
    vt = cfg.vartheta
    n_steps = hs.size

    terminal_v = np.empty(cfg.n_paths)
    terminal_vbar = np.empty(cfg.n_paths)
    n_store = min(cfg.store_paths, cfg.n_paths)
    stored_v = np.empty((n_store, n_steps + 1)) if n_store else None
    stored_vbar = np.empty((n_store, n_steps + 1)) if n_store else None

    def work(lo: int, hi: int) -> None:
        z = _normal_rows(cfg.master_seed, _NS_CIR, lo, hi, n_steps, cfg.zero_noise)
        v = np.full(hi - lo, cfg.v)
        vbar = np.zeros(hi - lo)
        keep = max(0, min(n_store, hi) - lo)
        if keep:
            stored_v[lo:lo + keep, 0] = v[:keep]
            stored_vbar[lo:lo + keep, 0] = 0.0
        for n in range(n_steps):
            vp = np.maximum(v, 0.0)
            v_next = v + sig * np.sqrt(vp) * (sqrt_hs[n] * z[:, n]) + kap * (vt - vp) * hs[n]
            vbar = vbar + 0.5 * hs[n] * (vp + np.maximum(v_next, 0.0))
            v = v_next
            if keep:
                stored_v[lo:lo + keep, n + 1] = np.maximum(v[:keep], 0.0)
                stored_vbar[lo:lo + keep, n + 1] = vbar[:keep]
        terminal_v[lo:hi] = np.maximum(v, 0.0)
        terminal_vbar[lo:hi] = vbar

    _run_blocks(cfg.n_paths, _BLOCK, threads, work)

    paths = ()
    vbar_paths = ()
    if n_store:
        t_grid = np.concatenate([[0.0], np.cumsum(hs)])
        t_grid[-1] = cfg.horizon
        paths = tuple(ContinuousPath(t_grid, stored_v[i]) for i in range(n_store))
        vbar_paths = tuple(ContinuousPath(t_grid, stored_vbar[i]) for i in range(n_store))
    return McEnsemble(cfg.master_seed, terminal_v, terminal_vbar,
                      paths=paths, vbar_paths=vbar_paths)


def simulate_ou(cfg: SdeConfig, threads: int = 1) -> McEnsemble:
    """Exact-in-distribution stepping of the Gaussian companion process.

    eps dY = dW - Y dt from Y_0 = 0. Each step draws the Brownian increment
    and, conditionally on it, the exponentially-weighted integral that the
    exact transition needs, so (Y, W) has the exact joint law at the grid
    nodes. Records per path the uniform gap sup_{t<=T} |Ybar_t - W_t|,
    which shrinks like sqrt(eps) as reversion accelerates.
    """
    hs = _step_sizes(cfg.step, cfg.horizon)
    eps = cfg.epsilon
    n_steps = hs.size
    a = np.exp(-hs / eps)
    cmix = eps * (1.0 - a) / hs
    s_var = 0.5 * eps * (1.0 - a * a) - cmix * cmix * hs
    s = np.sqrt(np.maximum(s_var, 0.0))
    sqrt_hs = np.sqrt(hs)

    terminal_y = np.empty(cfg.n_paths)
    terminal_ybar = np.empty(cfg.n_paths)
    sup_gap = np.empty(cfg.n_paths)

    def work(lo: int, hi: int) -> None:
        z = _normal_rows(cfg.master_seed, _NS_OU, lo, hi, 2 * n_steps, cfg.zero_noise)
        y = np.zeros(hi - lo)
        w = np.zeros(hi - lo)
        ybar = np.zeros(hi - lo)
        gap = np.zeros(hi - lo)
        for n in range(n_steps):
            dw = sqrt_hs[n] * z[:, 2 * n]
            integ = cmix[n] * dw + s[n] * z[:, 2 * n + 1]
            y_next = a[n] * y + integ / eps
            ybar = ybar + 0.5 * hs[n] * (y + y_next)
            y = y_next
            w = w + dw
            gap = np.maximum(gap, np.abs(ybar - w))
        terminal_y[lo:hi] = y
        terminal_ybar[lo:hi] = ybar
        sup_gap[lo:hi] = gap

    _run_blocks(cfg.n_paths, _BLOCK, threads, work)
    return McEnsemble(cfg.master_seed, terminal_y, terminal_ybar,
                      extra={"sup_gap": sup_gap})


def ivp_terminal_ensemble(epsilon: float, step: float, horizon: float,
                          n_paths: int, master_seed: int | tuple = 0,
                          noise_step: float | None = None,
                          threads: int = 1) -> McEnsemble:
    """Terminal (phi'(T), phi(T)) over an ensemble of Brownian trajectories.

    Forward Euler across the whole block at once; each path's noise lives
    on a uniform grid of spacing ``noise_step`` (default epsilon/8),
    realized in fixed chunks from the path's own stream and extended as the
    iterates advance. Noise is read at max(x, 0), as in the scalar solver.
    """
    if epsilon <= 0.0 or step <= 0.0 or step > epsilon / 4.0:
        raise InvalidConfig("need 0 < step <= epsilon/4")
    if noise_step is None:
        noise_step = epsilon / 8.0
    hs = _step_sizes(step, horizon)
    n_steps = hs.size
    inv_ns = 1.0 / noise_step
    scale = math.sqrt(noise_step)

    terminal_x = np.empty(n_paths)
    terminal_xbar = np.empty(n_paths)

    def grow(wvals: np.ndarray, lo: int, hi: int, chunks_done: int,
             chunks_needed: int) -> np.ndarray:
        cells_old = chunks_done * _IVP_NOISE_CHUNK
        cells_new = chunks_needed * _IVP_NOISE_CHUNK
        out = np.empty((hi - lo, cells_new + 1))
        out[:, : cells_old + 1] = wvals
        for c in range(chunks_done, chunks_needed):
            incs = np.empty((hi - lo, _IVP_NOISE_CHUNK))
            for i in range(lo, hi):
                rng = derive_rng(path_seed(master_seed, i), _NS_IVP_NOISE, c)
                incs[i - lo] = rng.standard_normal(_IVP_NOISE_CHUNK)
            a = c * _IVP_NOISE_CHUNK
            anchor = out[:, a]
            out[:, a + 1: a + 1 + _IVP_NOISE_CHUNK] = (
                anchor[:, None] + np.cumsum(incs * scale, axis=1)
            )
        return out

    def work(lo: int, hi: int) -> None:
        m = hi - lo
        rows = np.arange(m)
        wvals = np.zeros((m, 1))
        chunks = 0
        x = np.zeros(m)
        t = 0.0
        f = None
        for n in range(n_steps + 1):
            pos = np.maximum(x, 0.0)
            idx_f = pos * inv_ns
            need = int(np.max(idx_f)) + 2
            if need > chunks * _IVP_NOISE_CHUNK:
                chunks_needed = (need + _IVP_NOISE_CHUNK - 1) // _IVP_NOISE_CHUNK
                wvals = grow(wvals, lo, hi, chunks, chunks_needed)
                chunks = chunks_needed
            idx = idx_f.astype(np.int64)
            frac = idx_f - idx
            wv = wvals[rows, idx] * (1.0 - frac) + wvals[rows, idx + 1] * frac
            f = (wv + t - x) / epsilon + 1.0
            if n == n_steps:
                break
            x = x + hs[n] * f
            t = t + hs[n]
        terminal_x[lo:hi] = f
        terminal_xbar[lo:hi] = x

    _run_blocks(n_paths, _IVP_BLOCK, threads, work)
    return McEnsemble(master_seed, terminal_x, terminal_xbar)


def exit_time_process(vbar: ContinuousPath, up_to: float | None = None) -> CadlagPath:
    """First time the (non-decreasing) time-average exceeds each level."""
    if not vbar.is_non_decreasing():
        raise InvalidConfig("time-average path must be non-decreasing")
    return first_exit(vbar, up_to)


@dataclass(frozen=True)
class IgParams:
    """Inverse-Gaussian subordinator parameters.

    The marginal at time t has mean delta*t/gamma and shape (delta*t)^2,
    matching the characteristic exponent (gamma - sqrt(gamma^2 - 2iu)) *
    delta * t.
    """

    delta: float
    gamma: float

    def __post_init__(self):
        if self.delta <= 0.0 or self.gamma <= 0.0:
            raise ValueError("delta and gamma must be positive")

    def mean(self, t: float = 1.0) -> float:
        return self.delta * t / self.gamma

    def shape(self, t: float = 1.0) -> float:
        return (self.delta * t) ** 2


def ig_cdf(x, params: IgParams, t: float = 1.0):
    """Inverse-Gaussian CDF via the standard normal-CDF expression."""
    xs = np.asarray(x, dtype=float)
    if np.any(xs <= 0.0):
        raise DomainError("the inverse-Gaussian law lives on x > 0")
    mu = params.mean(t)
    lam = params.shape(t)
    root = np.sqrt(lam / xs)
    out = ndtr(root * (xs / mu - 1.0)) + np.exp(
        2.0 * lam / mu + log_ndtr(-root * (xs / mu + 1.0))
    )
    if np.isscalar(x):
        return float(out)
    return out


def ig_sample(params: IgParams, t: float = 1.0, n: int = 1,
              seed: int | tuple = 0,
              rng: np.random.Generator | None = None) -> np.ndarray:
    """Inverse-Gaussian draws by the Michael-Schucany-Haas transform."""
    if rng is None:
        rng = derive_rng(seed, _NS_IG)
    mu = params.mean(t)
    lam = params.shape(t)
    nu = rng.standard_normal(n) ** 2
    x = mu + 0.5 * mu * mu * nu / lam - 0.5 * mu / lam * np.sqrt(
        4.0 * mu * lam * nu + (mu * nu) ** 2
    )
    u = rng.uniform(size=n)
    return np.where(u <= mu / (mu + x), x, mu * mu / x)


def ks_distance(samples, cdf) -> float:
    """One-sample Kolmogorov-Smirnov statistic against a CDF callable."""
    arr = np.sort(np.asarray(samples, dtype=float))
    n = arr.size
    if n == 0:
        raise EmptySample("Kolmogorov-Smirnov needs at least one sample")
    f = np.asarray(cdf(arr), dtype=float)
    grid = np.arange(1, n + 1) / n
    return float(max(np.max(grid - f), np.max(f - (grid - 1.0 / n))))


def ks_two_sample(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise EmptySample("Kolmogorov-Smirnov needs at least one sample")
    both = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, both, side="right") / a.size
    cdf_b = np.searchsorted(b, both, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))
