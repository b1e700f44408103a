"""Render the two-body density/current triptych from cli CSV output.

Usage: carroll-plot-two-body two_body_density.csv two_body_current.csv --out fig.png
"""
import sys

from ._script import script_main


def main(argv=None) -> int:
    return script_main("two_body", 2, __doc__.splitlines()[0], argv)


if __name__ == "__main__":
    sys.exit(main())
