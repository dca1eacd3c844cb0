"""Command line frontend: radcom-plot <kind> --in <csv> --out <path>."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import FigureKind, FigureSpec, SchemaError, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="radcom-plot",
        description="Render radcomopt experiment CSVs as figures "
                    "(PNG plus an SVG twin).")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in FigureKind:
        p = sub.add_parser(kind.value)
        p.add_argument("--in", dest="input_csv", type=Path, required=True,
                       help="input CSV")
        p.add_argument("--out", dest="output_path", type=Path, required=True,
                       help="output image path")
        if kind is FigureKind.TRADEOFF:
            p.add_argument("--baselines", type=Path, default=None,
                           help="optional baselines CSV for reference points")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(input_csv=args.input_csv,
                      figure_kind=FigureKind(args.kind),
                      output_path=args.output_path,
                      baselines_csv=getattr(args, "baselines", None))
    try:
        out = render(spec)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out} and {Path(out).with_suffix('.svg')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
