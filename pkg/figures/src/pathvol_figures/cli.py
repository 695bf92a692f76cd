"""Script entry point: render figures from a directory of pathvol CSVs."""

from __future__ import annotations

import argparse
import sys

from .csvio import FormatError
from .render import render_composites, render_convergence_fan, render_diagnostics


def _window(raw: str | None):
    if raw is None:
        return (0.0, 1.0, 0.0, 1.0)
    if raw == "auto":
        return None
    parts = [float(tok) for tok in raw.split(",")]
    if len(parts) != 4:
        raise ValueError("--window takes xmin,xmax,ymin,ymax or 'auto'")
    return tuple(parts)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pathvol-figures",
        description="Render convergence, composite and diagnostic figures "
                    "from pathvol CSV output.",
    )
    parser.add_argument("panel", choices=["fan", "composites", "diagnostics"])
    parser.add_argument("--in", dest="in_dir", required=True,
                        help="directory holding the CSV output")
    parser.add_argument("--out", dest="out_file", required=True,
                        help="image file to write")
    parser.add_argument("--window", help="axis window xmin,xmax,ymin,ymax "
                                         "(default unit square) or 'auto'")
    args = parser.parse_args(argv)

    try:
        if args.panel == "fan":
            summary = render_convergence_fan(args.in_dir, args.out_file,
                                             window=_window(args.window))
        elif args.panel == "composites":
            win = _window(args.window)
            summary = render_composites(args.in_dir, args.out_file,
                                        window=win[:2] if win else None)
        else:
            summary = render_diagnostics(args.in_dir, args.out_file)
    except (FileNotFoundError, FormatError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out_file}: " +
          ", ".join(f"{k}={v}" for k, v in summary.items()))
    return 0


if __name__ == "__main__":
    sys.exit(main())
