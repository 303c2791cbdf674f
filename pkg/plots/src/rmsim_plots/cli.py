"""Command-line figure renderer.

    plots render --kind born|survival|trace|trajectory --in PATH... --out PATH.png
                 [--title TEXT] [--log-y] [--detect-s VALUE]

Reads only the simulator's documented result schemas; exits 2 on schema
mismatch or empty input, naming the offending file and column.
"""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, render
from .schemas import EmptyInput, SchemaMismatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plots", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    rend = sub.add_parser("render", help="render one figure")
    rend.add_argument("--kind", required=True,
                      choices=("born", "survival", "trace", "trajectory"))
    rend.add_argument("--in", dest="inputs", nargs="+", required=True,
                      help="input result file(s)")
    rend.add_argument("--out", required=True, help="output PNG path")
    rend.add_argument("--title", default="")
    rend.add_argument("--log-y", action="store_true")
    rend.add_argument("--detect-s", type=float, default=None,
                      help="detection level for the trace band")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        kind=args.kind,
        inputs=tuple(args.inputs),
        output=args.out,
        title=args.title,
        log_y=args.log_y,
        detect_s=args.detect_s,
    )
    try:
        render(spec)
    except (SchemaMismatch, EmptyInput, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    sys.stdout.write(f"wrote {spec.output}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
