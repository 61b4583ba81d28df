"""`figures <kind> --in <csv...> --out <png>` batch renderer."""

from __future__ import annotations

import argparse
import sys

from .io import SchemaError
from .plots import RENDERERS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figures")
    parser.add_argument("kind", choices=sorted(RENDERERS))
    parser.add_argument("--in", dest="inputs", nargs="+", required=True, help="input CSV files")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--gen-lo", type=float, help="window start (operator_histograms)")
    parser.add_argument("--gen-hi", type=float, help="window end (operator_histograms)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    options = {}
    if args.gen_lo is not None:
        options["gen_lo"] = args.gen_lo
    if args.gen_hi is not None:
        options["gen_hi"] = args.gen_hi
    spec = FigureSpec(kind=args.kind, inputs=args.inputs, output=args.out, options=options)
    try:
        out = render(spec)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"figures: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
