"""``plots render <kind> <input> <output>`` — figure files from readtask
outputs. Kinds: accuracy (report.json), confusion (confusion CSV),
distribution (feature-matrix CSV), topography (pattern JSON, with an
optional --layout CSV)."""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .layout import LayoutError
from .render import (
    RenderError,
    plot_accuracy,
    plot_confusion,
    plot_distributions,
    plot_topography,
)

KINDS = ("accuracy", "confusion", "distribution", "topography")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots", description="Render figures from readtask outputs.")
    parser.add_argument("--version", action="version",
                        version=f"readtask-plots {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure file")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("input", help="report.json / CSV / pattern JSON")
    p.add_argument("output", help="output figure (.png or .svg)")
    p.add_argument("--layout", help="channel layout CSV (topography only)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.kind == "accuracy":
            path = plot_accuracy(args.input, args.output)
        elif args.kind == "confusion":
            path = plot_confusion(args.input, args.output)
        elif args.kind == "distribution":
            path = plot_distributions(args.input, args.output)
        else:
            path = plot_topography(args.input, args.output,
                                   layout_path=args.layout)
    except (RenderError, LayoutError, OSError, json.JSONDecodeError) as exc:
        record = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        print(json.dumps(record), file=sys.stderr)
        return 2 if isinstance(exc, (RenderError, LayoutError)) else 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
