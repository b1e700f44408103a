from pathlib import Path

import numpy as np
import pytest

from carroll_plots.csvio import SchemaError, pivot_heatmap, read_table

FIXTURES = Path(__file__).parent / "fixtures"


class TestReadTable:
    def test_reads_fixture(self):
        t = read_table(FIXTURES/"dnls_tiny.csv")
        assert t.name == "dnls_heatmap"
        assert t.columns == ("X", "T", "density")
        assert t.column("density").size == 9

    def test_missing_format_tag(self, tmp_path):
        p = tmp_path/"bad.csv"
        p.write_text("# some other file\n# a,b\n# 1,1\n1,2\n")
        with pytest.raises(SchemaError, match="format tag"):
            read_table(p)

    def test_empty_csv(self, tmp_path):
        p = tmp_path/"empty.csv"
        p.write_text("# carroll-lab-csv v1 empty\n# a,b\n# 1,1\n")
        with pytest.raises(SchemaError, match="no data rows"):
            read_table(p)

    def test_ragged_row(self, tmp_path):
        p = tmp_path/"ragged.csv"
        p.write_text("# carroll-lab-csv v1 r\n# a,b\n# 1,1\n1,2\n3\n")
        with pytest.raises(SchemaError, match="row 5"):
            read_table(p)

    def test_missing_column_named(self):
        t = read_table(FIXTURES/"dnls_tiny.csv")
        with pytest.raises(SchemaError, match="'value'"):
            t.column("value")


class TestPivot:
    def test_full_grid(self):
        t = read_table(FIXTURES/"dnls_tiny.csv")
        xs, ts, grid = pivot_heatmap(t, "X", "T", "density")
        assert xs.tolist() == [0.0, 1.0, 2.0]
        assert ts.tolist() == [-1.0, 0.0, 1.0]
        assert grid[0, 0] == 0.0 and grid[2, 2] == pytest.approx(0.8)

    def test_incomplete_grid_rejected(self, tmp_path):
        p = tmp_path/"holes.csv"
        p.write_text("# carroll-lab-csv v1 h\n# X,T,density\n# 1,1,1\n"
                     "0,0,1\n0,1,2\n1,0,3\n")
        t = read_table(p)
        with pytest.raises(SchemaError, match="full grid"):
            pivot_heatmap(t, "X", "T", "density")
