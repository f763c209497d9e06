"""Command-line front end: render one CSV to one SVG.

Usage: ``projcurv-plots KIND input.csv output.svg [--reference-slope X] [--bins N]``.
Exit codes: 0 success, 2 bad arguments / malformed CSV.
"""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, render


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="projcurv-plots",
        description="Render projcurv experiment CSVs to deterministic SVG figures.",
    )
    parser.add_argument("kind", choices=sorted(KINDS), help="figure kind")
    parser.add_argument("csv_path", help="input CSV (projcurv schema)")
    parser.add_argument("out_path", help="output SVG path")
    parser.add_argument("--reference-slope", type=float, default=None,
                        help="dashed reference slope (decay/covconv)")
    parser.add_argument("--bins", type=int, default=None,
                        help="histogram bin count (density-hist)")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    opts = {}
    if args.reference_slope is not None:
        opts["reference_slope"] = args.reference_slope
    if args.bins is not None:
        opts["bins"] = args.bins
    try:
        result = render(args.kind, args.csv_path, args.out_path, **opts)
    except (ValueError, OSError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result.out_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
