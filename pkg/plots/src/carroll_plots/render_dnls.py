"""Render the |psi(X, T)|^2 evolution heatmap from cli CSV output.

Usage: carroll-plot-dnls dnls_heatmap.csv --out fig.png
"""
import sys

from ._script import script_main


def main(argv=None) -> int:
    return script_main("dnls", 1, __doc__.splitlines()[0], argv)


if __name__ == "__main__":
    sys.exit(main())
