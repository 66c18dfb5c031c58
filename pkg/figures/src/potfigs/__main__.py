"""CLI: python -m potfigs --figure fig5 --in converge.csv --out fig5.png"""
import argparse
import sys
from pathlib import Path

from .render import FigureSpec, render
from .schemas import FIGURE_IDS, SchemaError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="potfigs", description=__doc__)
    parser.add_argument("--figure", required=True, choices=FIGURE_IDS)
    parser.add_argument("--in", dest="input", required=True, help="harness CSV path")
    parser.add_argument("--out", dest="output", required=True, help="image path")
    parser.add_argument("--format", default=None, choices=["png", "svg"],
                        help="default: from the output suffix")
    args = parser.parse_args(argv)

    fmt = args.format or (Path(args.output).suffix.lstrip(".").lower() or "png")
    try:
        spec = FigureSpec(args.figure, Path(args.input), Path(args.output), fmt)
        out = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
