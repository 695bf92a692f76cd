"""Pathwise fast-reverting volatility toolkit.

Solves the square-root-volatility initial-value problem for arbitrary
continuous noise trajectories, computes the running-supremum and
first-exit functionals with their fast-reversion limits, and verifies the
distributional connections (time-averaged square-root SDE, inverse-
Gaussian subordinator) by Monte Carlo.
"""

from .errors import (DomainError, EmptySample, InvalidConfig, InvalidSpec,
                     NoiseExhausted, NonFiniteState, NotBijective, OutOfDomain,
                     PathvolError, RangeExceedsDomain, UnresolvedLevel)
from .functionals import (ExitBarrier, first_exit, limit_generalized, limit_phi0,
                          running_sup)
from .ivp_solver import (BoundReport, CompositeSeries, IvpConfig, IvpSolution,
                         bound_check, composite_series, recover_noise, solve)
from .noise import NoiseSpec, NoiseStream, derive_rng, extend, generate, path_seed
from .paths import CadlagPath, ContinuousPath, affine, compose, identity_path, zero_path
from .sde_mc import (IgParams, McEnsemble, SdeConfig, exit_time_process, ig_cdf,
                     ig_sample, ivp_terminal_ensemble, ks_distance, ks_two_sample,
                     simulate_cir, simulate_ou)

__version__ = "0.1.0"

__all__ = [
    "BoundReport", "CadlagPath", "CompositeSeries", "ContinuousPath",
    "DomainError", "EmptySample", "ExitBarrier", "IgParams", "InvalidConfig",
    "InvalidSpec", "IvpConfig", "IvpSolution", "McEnsemble", "NoiseExhausted",
    "NoiseSpec", "NoiseStream", "NonFiniteState", "NotBijective", "OutOfDomain",
    "PathvolError", "RangeExceedsDomain", "SdeConfig", "UnresolvedLevel",
    "affine", "bound_check", "compose", "composite_series", "derive_rng",
    "exit_time_process", "extend", "first_exit", "generate", "identity_path",
    "ig_cdf", "ig_sample", "ivp_terminal_ensemble", "ks_distance",
    "ks_two_sample", "limit_generalized", "limit_phi0", "path_seed",
    "recover_noise", "running_sup", "simulate_cir", "simulate_ou", "solve",
    "zero_path",
]
