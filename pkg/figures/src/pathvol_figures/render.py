"""Figure rendering from pathvol CSV outputs.

Rendering is a pure function of the CSV contents: style is pinned, no
timestamps or version strings enter the file, so re-rendering identical
inputs yields identical bytes. The default axis window is the unit square;
pass ``window=None`` to autoscale.
"""

from __future__ import annotations

import glob
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import FormatError, read, staircase_points

STYLE = {
    "figure.figsize": (7.0, 5.0),
    "figure.dpi": 110,
    "savefig.dpi": 150,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.25,
    "lines.linewidth": 1.1,
}

_META = {"Software": "pathvol-figures"}

_BLUE = plt.get_cmap("Blues")
_PURPLE = plt.get_cmap("Purples")


def _fan_inputs(in_dir: str):
    singles = sorted(glob.glob(os.path.join(in_dir, "phi.csv")))
    sweeps = sorted(glob.glob(os.path.join(in_dir, "phi_eps*.csv")))
    files = sweeps or singles
    if not files:
        raise FileNotFoundError(f"no phi CSV files in {in_dir}")
    curves = []
    for f in files:
        pf = read(f)
        eps = float(pf.meta.get("eps", 0.0))
        curves.append((eps, pf))
    curves.sort(key=lambda c: -c[0])  # big timescale first, limit on top
    return curves


def render_convergence_fan(in_dir: str, out_file: str, window=(0, 1, 0, 1)):
    """Solution fan over the timescale sweep, drift curve and limit staircase.

    Returns a summary of what was drawn, for programmatic checks:
    ``eps_order`` (plot order), ``staircase_breakpoints`` and
    ``staircase_infinite_from`` when a limit file is present.
    """
    curves = _fan_inputs(in_dir)
    omega_file = os.path.join(in_dir, "omega.csv")
    phi0_file = os.path.join(in_dir, "phi0.csv")
    omega = read(omega_file) if os.path.exists(omega_file) else None
    phi0 = read(phi0_file) if os.path.exists(phi0_file) else None

    summary = {"eps_order": [eps for eps, _ in curves],
               "n_curves": len(curves)}
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for rank, (eps, pf) in enumerate(curves):
            shade = 0.35 + 0.6 * (rank + 1) / len(curves)
            ax.plot(pf.x, pf.values, color=_BLUE(shade),
                    label=f"timescale {eps:g}")
        if omega is not None:
            drift = omega.x - omega.values
            ax.plot(drift, omega.x, color="tab:orange",
                    label="(x - noise(x), x)")
        if phi0 is not None:
            ts, vs = staircase_points(phi0)
            ax.plot(ts, vs, color="black", linewidth=1.6, label="limit")
            summary["staircase_breakpoints"] = phi0.x.tolist()
            summary["staircase_infinite_from"] = phi0.infinite_from
            if phi0.infinite_from is not None and window is not None:
                ax.plot([phi0.infinite_from], [window[3]], marker="o",
                        mfc="none", mec="black", ms=7, clip_on=False,
                        linestyle="none")
        if window is not None:
            ax.set_xlim(window[0], window[1])
            ax.set_ylim(window[2], window[3])
        ax.set_xlabel("time")
        ax.set_ylabel("space")
        ax.legend(loc="upper left", fontsize=8)
        fig.savefig(out_file, metadata=_META)
        plt.close(fig)
    return summary


def _composite_inputs(in_dir: str):
    singles = sorted(glob.glob(os.path.join(in_dir, "composites.csv")))
    sweeps = sorted(glob.glob(os.path.join(in_dir, "composites_eps*.csv")))
    files = sweeps or singles
    if not files:
        raise FileNotFoundError(f"no composites CSV files in {in_dir}")
    tables = []
    for f in files:
        pf = read(f)
        tables.append((float(pf.meta.get("eps", 0.0)), pf))
    tables.sort(key=lambda c: -c[0])
    return tables


def render_composites(in_dir: str, out_file: str, window=(0, 1)):
    """Panels for the scaled volatility and the noise-through-solution series."""
    tables = _composite_inputs(in_dir)
    summary = {"eps_order": [eps for eps, _ in tables]}
    with plt.rc_context(STYLE):
        fig, (top, bottom) = plt.subplots(2, 1, sharex=True,
                                          figsize=STYLE["figure.figsize"])
        for rank, (eps, pf) in enumerate(tables):
            shade = 0.35 + 0.6 * (rank + 1) / len(tables)
            t = pf.columns["t"]
            top.plot(t, pf.columns["eps_phi_prime"], color=_BLUE(shade),
                     label=f"timescale {eps:g}")
            bottom.plot(t, pf.columns["omega_circ_phi_plus_e"],
                        color=_PURPLE(shade))
            if "log_heston" in pf.columns:
                bottom.plot(t, pf.columns["log_heston"], color=_PURPLE(shade),
                            linestyle="--", alpha=0.7)
        top.set_ylabel("scaled volatility")
        bottom.set_ylabel("noise along solution + t")
        bottom.set_xlabel("time")
        if window is not None:
            bottom.set_xlim(window[0], window[1])
        top.legend(loc="upper right", fontsize=8)
        fig.savefig(out_file, metadata=_META)
        plt.close(fig)
    return summary


def render_diagnostics(in_dir: str, out_file: str):
    """Bound-report envelope and the distribution-distance curve."""
    bound_files = sorted(glob.glob(os.path.join(in_dir, "bounds*.txt")))
    ks_file = os.path.join(in_dir, "ks_curve.csv")
    have_ks = os.path.exists(ks_file)
    if not bound_files and not have_ks:
        raise FileNotFoundError(f"no bounds*.txt or ks_curve.csv in {in_dir}")

    rows = []
    for f in bound_files:
        entries = {}
        with open(f) as fh:
            for line in fh:
                key, _, raw = line.strip().partition("=")
                try:
                    entries[key] = float(raw)
                except ValueError:
                    entries[key] = raw
        if "uniform_gap" in entries:
            rows.append((f, entries))

    summary = {"n_bound_reports": len(rows), "has_ks_curve": have_ks}
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0))
        ax = axes[0]
        if rows:
            labels = [os.path.basename(f).replace("bounds", "").replace(".txt", "")
                      or "run" for f, _ in rows]
            gaps = [e["uniform_gap"] for _, e in rows]
            lo = [e.get("max_lower_violation", 0.0) for _, e in rows]
            hi = [e.get("max_upper_violation", 0.0) for _, e in rows]
            pos = np.arange(len(rows))
            ax.bar(pos - 0.2, gaps, width=0.2, label="uniform gap")
            ax.bar(pos, lo, width=0.2, label="lower violation")
            ax.bar(pos + 0.2, hi, width=0.2, label="upper violation")
            ax.set_xticks(pos, labels, rotation=30, fontsize=7)
            ax.legend(fontsize=7)
        ax.set_title("band diagnostics")
        ax = axes[1]
        if have_ks:
            pf = read(ks_file)
            ax.plot(pf.columns["eps"], pf.columns["ks"], marker="o")
            ax.set_xscale("log")
            ax.set_yscale("log")
            ax.set_xlabel("timescale")
            ax.set_ylabel("distribution distance")
            summary["ks_points"] = int(pf.columns["eps"].size)
        ax.set_title("marginal distance curve")
        fig.savefig(out_file, metadata=_META)
        plt.close(fig)
    return summary
