"""Command line: `plots <kind> <csv...> -o <file>`."""

from __future__ import annotations

import argparse
import sys

from .errors import PlotsError
from .render import KINDS, PlotSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Generate figures from beam-alignment experiment CSVs")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("csvs", nargs="+", help="input CSV file(s)")
    parser.add_argument("-o", "--output", required=True,
                        help="output image (png, svg, or pdf)")
    parser.add_argument("--title", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = PlotSpec(args.kind, tuple(args.csvs), args.output, args.title)
        path = render(spec)
    except PlotsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
