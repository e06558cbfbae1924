"""Command line: figplots <kind> --csv <path> --out <path.png>."""

from __future__ import annotations

import argparse
import sys

from .plots import PLOTTERS, FigplotsError


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="figplots", description="Render omcontrol sweep CSVs to PNG figures"
    )
    parser.add_argument("kind", choices=sorted(PLOTTERS))
    parser.add_argument("--csv", required=True, help="input sweep CSV")
    parser.add_argument("--out", required=True, help="output PNG path")
    args = parser.parse_args(argv)
    try:
        PLOTTERS[args.kind](args.csv, args.out)
    except (FigplotsError, ValueError) as exc:
        print(f"figplots: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
