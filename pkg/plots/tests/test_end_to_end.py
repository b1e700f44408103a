"""Secondary acceptance: render every figure from real cli outputs.

The data-producing package is driven only through its command-line
interface (no imports of its internals here).
"""
import subprocess
import sys
from pathlib import Path

import pytest

from carroll_plots.render_dnls import main as dnls_main
from carroll_plots.render_g2 import main as g2_main
from carroll_plots.render_marginals import main as marginals_main
from carroll_plots.render_two_body import main as two_body_main


def cli(args):
    proc = subprocess.run([sys.executable, "-m", "carroll_lab.cli"] + args,
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="module")
def cli_outputs(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli-out")
    cli(["figures-two-body", "--out", str(base/"figs"),
         "--set", "n_heatmap=31", "--set", "n_marginal_x=17",
         "--set", "n_marginal_t=17"])
    cli(["dnls", "--out", str(base/"dnls"), "--set", "n_points=512",
         "--set", "x_final=2.0", "--set", "snapshots=9"])
    cli(["hbt", "--out", str(base/"hbt"), "--set", "runs=50000"])
    return base


class TestEndToEnd:
    def test_two_body_triptych(self, cli_outputs, tmp_path):
        out = tmp_path/"two_body.png"
        rc = two_body_main([str(cli_outputs/"figs"/"two_body_density.csv"),
                            str(cli_outputs/"figs"/"two_body_current.csv"),
                            "--out", str(out)])
        assert rc == 0 and out.stat().st_size > 10_000

    def test_marginal_panels(self, cli_outputs, tmp_path):
        out = tmp_path/"marginals.png"
        rc = marginals_main(
            [str(cli_outputs/"figs"/"marginal_density_vs_x.csv"),
             str(cli_outputs/"figs"/"marginal_current_vs_x.csv"),
             str(cli_outputs/"figs"/"marginal_density_vs_t.csv"),
             str(cli_outputs/"figs"/"marginal_current_vs_t.csv"),
             "--out", str(out)])
        assert rc == 0 and out.stat().st_size > 10_000

    def test_g2_heatmaps(self, cli_outputs, tmp_path):
        for sector in ("fermi", "bose"):
            out = tmp_path/f"g2_{sector}.png"
            rc = g2_main([str(cli_outputs/"hbt"/f"g2_{sector}.csv"),
                          "--out", str(out)])
            assert rc == 0 and out.stat().st_size > 10_000

    def test_dnls_heatmap(self, cli_outputs, tmp_path):
        out = tmp_path/"dnls.png"
        rc = dnls_main([str(cli_outputs/"dnls"/"dnls_heatmap.csv"),
                        "--out", str(out)])
        assert rc == 0 and out.stat().st_size > 10_000
