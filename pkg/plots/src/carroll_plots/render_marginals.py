"""Render the one-body marginal panels from cli CSV output.

Usage: carroll-plot-marginals marginal_density_vs_x.csv marginal_current_vs_x.csv \
           marginal_density_vs_t.csv marginal_current_vs_t.csv --out fig.png
"""
import sys

from ._script import script_main


def main(argv=None) -> int:
    return script_main("marginals", 4, __doc__.splitlines()[0], argv)


if __name__ == "__main__":
    sys.exit(main())
