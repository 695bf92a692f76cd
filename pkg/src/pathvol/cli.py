"""Command-line front end: solve, limit, verify and roundtrip workflows.

Every command is deterministic given its flags and --seed, and rerunning
overwrites byte-identical files (a timestamp header line is added unless
--no-timestamp). Flags override a key=value --config file, which overrides
the built-in defaults. Exit codes: 0 ok, 1 verification failure, 2
configuration error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import io as pathio
from . import verify as verify_mod
from .errors import (InvalidConfig, InvalidSpec, NoiseExhausted, NonFiniteState,
                     NotBijective, OutOfDomain, PathvolError, RangeExceedsDomain)
from .functionals import ExitBarrier, first_exit, limit_generalized, running_sup
from .ivp_solver import IvpConfig, bound_check, composite_series, recover_noise, solve
from .noise import NoiseSpec, generate, extend
from .paths import CadlagPath, ContinuousPath, affine, identity_path
from .sde_mc import IgParams, SdeConfig, simulate_cir

_OMEGA_KINDS = {
    "sine": "sine",
    "kl": "kl_bridge",
    "brownian": "brownian",
    "fbm": "fbm",
    "zero": "constant",
    "identity": "identity",
}

_DEFAULTS = {
    "omega": "sine",
    "eps": 0.1,
    "step": None,
    "noise_step": 2.0 ** -10,
    "horizon": 1.0,
    "sigma": 1.0,
    "theta": "identity",
    "beta": None,
    "npaths": 10_000,
    "seed": verify_mod.DEFAULT_SEED,
    "threads": 1,
    "out": ".",
    "no_timestamp": False,
    "eps_sweep": None,
    "omega_bar": None,
    "max_extent": None,
    "hurst": 0.5,
    "kl_terms": 64,
    "suite": "all",
    "ig_delta": 1.0,
    "ig_gamma": 1.0,
    "dump_paths": 0,
    "phi": "quadratic",
    "phi_step": 2.0 ** -12,
}


def _read_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, raw = line.partition("=")
            out[key.strip().replace("-", "_")] = raw.strip()
    return out


def _coerce(key: str, raw, like):
    if raw is None or not isinstance(raw, str):
        return raw
    if isinstance(like, bool) or key == "no_timestamp":
        return raw.lower() in ("1", "true", "yes")
    if isinstance(like, int) and not isinstance(like, bool):
        return int(raw)
    if isinstance(like, float):
        return float(raw)
    return raw


class _Options:
    """Flag > config-file > default resolution."""

    def __init__(self, args: argparse.Namespace):
        self._cli = vars(args)
        cfg_path = self._cli.get("config")
        self._file = _read_config_file(cfg_path) if cfg_path else {}

    def get(self, key: str):
        cli_val = self._cli.get(key)
        if cli_val is not None:
            return cli_val
        default = _DEFAULTS.get(key)
        if key in self._file:
            return _coerce(key, self._file[key], default)
        return default


def _noise_spec(opts: _Options) -> NoiseSpec:
    omega = opts.get("omega")
    seed = opts.get("seed")
    step = opts.get("noise_step")
    if omega.startswith("table:"):
        return NoiseSpec(kind="custom_table", table=omega[len("table:"):],
                         step=step, seed=seed)
    if omega not in _OMEGA_KINDS:
        raise InvalidConfig(
            f"--omega must be one of {sorted(_OMEGA_KINDS)} or table:PATH"
        )
    return NoiseSpec(kind=_OMEGA_KINDS[omega], step=step, seed=seed,
                     hurst=opts.get("hurst"), terms=opts.get("kl_terms"))


def _barrier(opts: _Options, horizon: float) -> ExitBarrier:
    theta = opts.get("theta")
    sigma = opts.get("sigma")
    if theta == "identity":
        theta_path = identity_path(max(horizon, 1.0) * 2.0)
    elif theta.startswith("affine:"):
        a = float(theta[len("affine:"):])
        if a <= 0.0:
            raise InvalidConfig("--theta affine:a needs a > 0")
        end = max(horizon, 1.0) * 2.0
        theta_path = ContinuousPath([0.0, end], [0.0, a * end])
    else:
        raise InvalidConfig("--theta must be 'identity' or 'affine:a'")
    return ExitBarrier(theta=theta_path, sigma=sigma)


def _eps_list(opts: _Options) -> list[float]:
    sweep = opts.get("eps_sweep")
    if sweep:
        return [float(tok) for tok in str(sweep).split(",") if tok]
    return [float(opts.get("eps"))]


def _out_dir(opts: _Options) -> Path:
    out = Path(opts.get("out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_solve(opts: _Options) -> int:
    eps_list = _eps_list(opts)
    horizon = float(opts.get("horizon"))
    spec = _noise_spec(opts)
    stamp = not opts.get("no_timestamp")
    out = _out_dir(opts)
    sweep = len(eps_list) > 1

    bar_opt = opts.get("theta") != "identity" or float(opts.get("sigma")) != 1.0
    barrier = _barrier(opts, horizon) if bar_opt else None

    omega_bar_stream = None
    if opts.get("omega_bar"):
        kind = opts.get("omega_bar")
        if kind.startswith("table:"):
            bar_spec = NoiseSpec(kind="custom_table", table=kind[len("table:"):],
                                 step=opts.get("noise_step"),
                                 seed=(opts.get("seed"), 1))
        elif kind in _OMEGA_KINDS:
            bar_spec = NoiseSpec(kind=_OMEGA_KINDS[kind], step=opts.get("noise_step"),
                                 seed=(opts.get("seed"), 1), hurst=opts.get("hurst"),
                                 terms=opts.get("kl_terms"))
        else:
            raise InvalidConfig("--omega-bar takes the same grammar as --omega")
        omega_bar_stream = generate(bar_spec, 1.0)

    initial = spec.step if spec.kind == "custom_table" else 1.0
    stream = generate(spec, initial)
    for eps in eps_list:
        step = opts.get("step")
        step = float(step) if step is not None else min(horizon * 2.0 ** -14, eps / 4.0)
        cfg = IvpConfig(epsilon=eps, step=step, horizon=horizon, barrier=barrier)
        sol = solve(stream, cfg)
        # solve() extends its own copy of the stream; re-acquire the
        # realized extent the solution visited for reporting
        stream = _rerealize(stream, sol)
        report = bound_check(sol, stream.realized, eps) if barrier is None else None
        if omega_bar_stream is not None:
            omega_bar_stream = extend(
                omega_bar_stream, max(1.0, float(np.max(sol.phi.values)) * 1.01)
            )
        series = composite_series(
            sol, stream.realized, eps,
            omega_bar_stream.realized if omega_bar_stream is not None else None,
        )
        suffix = f"_eps{eps:g}" if sweep else ""
        meta = {"eps": eps, "step": step, "horizon": horizon,
                "omega": opts.get("omega"), "seed": str(opts.get("seed"))}
        pathio.write_continuous(sol.phi, out / f"phi{suffix}.csv",
                                meta | {"series": "phi"}, timestamp=stamp)
        pathio.write_continuous(sol.phi_hat, out / f"phihat{suffix}.csv",
                                meta | {"series": "phihat"}, timestamp=stamp)
        if report is not None:
            pathio.write_report(report.as_dict(), out / f"bounds{suffix}.txt")
        else:
            pathio.write_report({"skipped": "bounds apply to the canonical problem"},
                                out / f"bounds{suffix}.txt")
        columns = {
            "t": sol.phi.grid,
            "eps_phi_prime": series.eps_phi_prime.values,
            "omega_circ_phi_plus_e": series.omega_circ_phi_plus_e.values,
        }
        if series.log_heston is not None:
            columns["log_heston"] = series.log_heston.values
        pathio.write_table(columns, out / f"composites{suffix}.csv", meta,
                           timestamp=stamp)
    pathio.write_continuous(stream.realized, out / "omega.csv",
                            {"omega": opts.get("omega"), "seed": str(opts.get("seed"))},
                            timestamp=stamp)
    return 0


def _rerealize(stream, sol):
    """Make sure the reported noise covers everything the solution visited."""
    need = float(np.max(np.maximum(sol.phi.values, 0.0)))
    if need > stream.domain_end:
        return extend(stream, need)
    return stream


def cmd_limit(opts: _Options) -> int:
    horizon = float(opts.get("horizon"))
    sigma = float(opts.get("sigma"))
    spec = _noise_spec(opts)
    barrier = _barrier(opts, horizon)
    out = _out_dir(opts)
    stamp = not opts.get("no_timestamp")
    max_extent = opts.get("max_extent")
    max_extent = float(max_extent) if max_extent is not None else 32.0 * (horizon + 1.0)

    theta_top = barrier.theta.eval(horizon)
    initial = spec.step if spec.kind == "custom_table" \
        else min(max(1.0, horizon), max_extent)
    stream = generate(spec, initial)

    # the identity trajectory is the one kind whose drift x - sigma*omega(x)
    # is known to stay bounded (at (1-sigma)x); extension cannot resolve
    # levels there, so the inf-of-empty-set sentinel is genuine
    bounded_drift = spec.kind == "identity" and sigma >= 1.0
    capped = False
    if not bounded_drift and spec.extendable:
        while True:
            drift = affine(stream.realized, -sigma, 0.0, add_identity=True)
            if running_sup(drift).values[-1] > theta_top:
                break
            if stream.domain_end >= max_extent:
                capped = True
                break
            stream = extend(stream, min(max_extent, stream.domain_end * 2.0))

    limit = limit_generalized(stream.realized, barrier, up_to=horizon)
    if capped and limit.infinite_from is not None:
        # the realized prefix ran out before these levels resolved: report
        # them as undetermined rather than infinite
        limit = CadlagPath(limit.breakpoints, limit.left_values,
                           limit.right_values, initial_value=limit.initial_value,
                           unresolved_from=limit.infinite_from)
    meta = {"omega": opts.get("omega"), "seed": str(opts.get("seed")),
            "sigma": sigma, "horizon": horizon}
    pathio.write_cadlag(limit, out / "phi0.csv", meta, timestamp=stamp)
    return 0


def cmd_verify(opts: _Options) -> int:
    out = _out_dir(opts)
    n_paths = int(opts.get("npaths"))
    seed = opts.get("seed")
    threads = int(opts.get("threads"))
    suite = opts.get("suite")
    reference = IgParams(delta=float(opts.get("ig_delta")),
                         gamma=float(opts.get("ig_gamma")))
    beta = opts.get("beta")

    results = []
    curve = None
    if beta is not None:
        beta = float(beta)
        all_var = verify_mod.variance_table_check(n_paths, seed, threads)
        tag = f"beta{beta:g}"
        results = [r for r in all_var if tag in r.name]
    elif suite == "variance":
        results = verify_mod.variance_table_check(n_paths, seed, threads)
    elif suite == "weak":
        results = [verify_mod.weak_equivalence_check(n_paths, seed, threads)]
    elif suite == "ig":
        results, curve = verify_mod.ig_marginal_check(n_paths, seed, threads, reference)
    elif suite == "ou":
        results = [verify_mod.ou_reversion_check(100, seed, threads)]
    else:
        results, curve = verify_mod.run_all(n_paths, seed, threads, reference)

    dump = int(opts.get("dump_paths"))
    if dump:
        cfg = SdeConfig(epsilon=0.01, step=0.01 / 8.0, horizon=1.0,
                        n_paths=max(dump, 1), master_seed=(seed, 699),
                        store_paths=dump)
        ens = simulate_cir(cfg)
        for i, (vp, vbp) in enumerate(zip(ens.paths, ens.vbar_paths)):
            pathio.write_continuous(vp, out / f"vpath_{i:03d}.csv",
                                    {"path_index": i})
            pathio.write_continuous(vbp, out / f"vbarpath_{i:03d}.csv",
                                    {"path_index": i})

    lines = [r.line() for r in results]
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    summary = {}
    for r in results:
        for key, val in r.values.items():
            summary[f"{r.name}.{key}"] = val
    pathio.write_report(summary, out / "summary.txt")
    if curve:
        eps_arr = np.array(sorted(curve, reverse=True))
        pathio.write_table({"eps": eps_arr,
                            "ks": np.array([curve[e] for e in eps_arr])},
                           out / "ks_curve.csv")
    print("\n".join(lines))
    return 0 if all(r.passed for r in results) else 1


def cmd_roundtrip(opts: _Options) -> int:
    eps = float(opts.get("eps"))
    horizon = float(opts.get("horizon"))
    phi_step = float(opts.get("phi_step"))
    step = opts.get("step")
    step = float(step) if step is not None else min(2.0 ** -10, eps / 4.0)
    out = _out_dir(opts)
    stamp = not opts.get("no_timestamp")

    kind = opts.get("phi")
    pad = horizon * 1.05
    tg = np.arange(0.0, pad + phi_step / 2.0, phi_step)
    if kind == "identity":
        target = lambda t: t
    elif kind == "parabola":
        target = lambda t: t + t * t / (2.0 * eps)
    elif kind == "quadratic":
        target = lambda t: t + t * t
    else:
        raise InvalidConfig("--phi must be identity, parabola or quadratic")
    phi = ContinuousPath(tg, target(tg))

    omega = recover_noise(phi, eps)
    cfg = IvpConfig(epsilon=eps, step=step, horizon=horizon)
    sol = solve(omega, cfg)
    err = float(np.max(np.abs(sol.phi.values - target(sol.phi.grid))))

    pathio.write_continuous(omega, out / "omega_recovered.csv",
                            {"phi": kind, "eps": eps}, timestamp=stamp)
    pathio.write_continuous(sol.phi, out / "phi_resolved.csv",
                            {"phi": kind, "eps": eps, "step": step}, timestamp=stamp)
    pathio.write_report({"uniform_error": err, "eps": eps, "step": step,
                         "phi": kind}, out / "roundtrip.txt")
    print(f"roundtrip {kind}: uniform_error={err:.3e}")
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file (flags take precedence)")
    p.add_argument("--omega", help="sine|kl|brownian|fbm|zero|identity|table:PATH")
    p.add_argument("--eps", type=float, help="reversionary timescale")
    p.add_argument("--eps-sweep", dest="eps_sweep", help="comma-separated timescales")
    p.add_argument("--step", type=float, help="Euler time step")
    p.add_argument("--noise-step", dest="noise_step", type=float,
                   help="noise grid spacing")
    p.add_argument("--horizon", type=float, help="end time / level horizon")
    p.add_argument("--sigma", type=float, help="noise scale in the barrier form")
    p.add_argument("--theta", help="identity | affine:a")
    p.add_argument("--beta", type=float, help="regime exponent in {0, 0.5, 1}")
    p.add_argument("--npaths", type=int, help="Monte Carlo ensemble size")
    p.add_argument("--seed", type=int, help="master seed; all randomness flows from it")
    p.add_argument("--threads", type=int, help="worker pool size")
    p.add_argument("--out", help="output directory")
    p.add_argument("--no-timestamp", dest="no_timestamp", action="store_const",
                   const=True, help="suppress the generated-at header line")
    p.add_argument("--hurst", type=float, help="Hurst index for fbm noise")
    p.add_argument("--kl-terms", dest="kl_terms", type=int,
                   help="series truncation for kl noise")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathvol",
        description="Pathwise fast-reverting volatility: solver, limits and "
                    "Monte Carlo verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve the pathwise problem and emit series")
    _add_common(p)
    p.add_argument("--omega-bar", dest="omega_bar",
                   help="second noise trajectory for the log-price composite")

    p = sub.add_parser("limit", help="exit-time limit of the time-average")
    _add_common(p)
    p.add_argument("--max-extent", dest="max_extent", type=float,
                   help="cap on lazy noise extension before levels go unresolved")

    p = sub.add_parser("verify", help="Monte Carlo verification suites")
    _add_common(p)
    p.add_argument("--suite", choices=["all", "variance", "weak", "ig", "ou"],
                   help="which suite to run")
    p.add_argument("--ig-delta", dest="ig_delta", type=float,
                   help="reference subordinator delta")
    p.add_argument("--ig-gamma", dest="ig_gamma", type=float,
                   help="reference subordinator gamma")
    p.add_argument("--dump-paths", dest="dump_paths", type=int,
                   help="write the first K simulated paths as CSV")

    p = sub.add_parser("roundtrip", help="recover noise from a trajectory and re-solve")
    _add_common(p)
    p.add_argument("--phi", choices=["identity", "parabola", "quadratic"],
                   help="trajectory preset to invert")
    p.add_argument("--phi-step", dest="phi_step", type=float,
                   help="sampling step for the trajectory preset")
    return parser


_COMMANDS = {
    "solve": cmd_solve,
    "limit": cmd_limit,
    "verify": cmd_verify,
    "roundtrip": cmd_roundtrip,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        opts = _Options(args)
        return _COMMANDS[args.command](opts)
    except (InvalidConfig, InvalidSpec, FileNotFoundError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NonFiniteState, NoiseExhausted, NotBijective, OutOfDomain,
            RangeExceedsDomain, PathvolError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
