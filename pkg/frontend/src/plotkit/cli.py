"""Command line entry point: hnls-plot."""

from __future__ import annotations

import argparse
import sys

from plotkit.core import KINDS, PlotSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hnls-plot",
        description="Render hnls CSV outputs into figures",
    )
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="inputs", required=True, action="append",
                        metavar="FILE", help="input CSV (repeatable)")
    parser.add_argument("--out", default=None, metavar="FILE",
                        help="output image (default: <first input>.png)")
    parser.add_argument("--logx", action="store_true")
    parser.add_argument("--logy", action="store_true")
    parser.add_argument("--title", default="")
    parser.add_argument("--order", type=int, default=1,
                        help="energy order k for the growth bound overlay")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = args.out if args.out is not None else args.inputs[0] + ".png"
    try:
        spec = PlotSpec(
            kind=args.kind,
            inputs=args.inputs,
            output=out,
            logx=args.logx,
            logy=args.logy,
            title=args.title,
            growth_order=args.order,
        )
        result = render(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote: {result.output}")
    if result.annotations:
        for key in sorted(result.annotations):
            print(f"cell {key}: {result.annotations[key]}")
    if result.fit_constant is not None:
        print(f"fit_constant: {result.fit_constant}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
