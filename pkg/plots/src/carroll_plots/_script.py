"""Shared argument handling for the standalone rendering scripts."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .csvio import SchemaError
from .figures import FigureSpec, render


def script_main(kind: str, n_inputs: int, description: str, argv=None) -> int:
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("csv", nargs=n_inputs, help="input CSV path(s)")
    parser.add_argument("--out", required=True, help="output PNG path")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0,) else 0
    try:
        out = render(FigureSpec(tuple(args.csv), Path(args.out), kind))
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0
