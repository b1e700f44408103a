"""Render a g2(t, t') heatmap with coincidence-line inset from cli CSV output.

Usage: carroll-plot-g2 g2_fermi.csv --out fig.png
"""
import sys

from ._script import script_main


def main(argv=None) -> int:
    return script_main("g2", 1, __doc__.splitlines()[0], argv)


if __name__ == "__main__":
    sys.exit(main())
