"""Script interface: render <kind> <csv...> -o <image>."""

from __future__ import annotations

import argparse
import sys

from .csvio import RenderError
from .figures import KINDS, FigureSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render", description="Render viscowave CSV outputs into SVG/PNG figures"
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("inputs", nargs="+", help="CSV inputs (manifest.txt may be included)")
    parser.add_argument("-o", "--output", required=True, help="output image (.svg or .png)")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        render(FigureSpec(args.kind, tuple(args.inputs), args.output))
    except RenderError as exc:
        print(f"render: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
