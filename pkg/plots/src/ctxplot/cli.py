"""CLI: ``plot <kind> --in <csv> --out <file> [--format png|svg]``.

Exit codes: 0 success, 2 schema/config error (with a column-level diagnostic
for header mismatches), 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .reader import NoDataError, SchemaError
from .render import KINDS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render benchmark CSVs to publication-style figures"
    )
    parser.add_argument("kind", choices=KINDS, help="figure kind")
    parser.add_argument("--in", dest="input_csv", required=True, help="input CSV")
    parser.add_argument("--out", dest="output_path", required=True, help="output file")
    parser.add_argument("--format", dest="fmt", choices=["png", "svg"], default="png")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(args.kind, args.input_csv, args.output_path, args.fmt)
        meta = render(spec)
    except (SchemaError, NoDataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    for line in meta.get("annotations", []):
        print(line)
    print(f"wrote {args.output_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
