"""Figure builders: pure presentation of carroll-lab CSV tables.

No numbers are transformed beyond axis mapping and color normalization; a
figure's color scale is shared across its panels so the panels stay
comparable.  Output is raster PNG.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import SchemaError, Table, pivot_heatmap, read_table

CMAP = "viridis"
DPI = 150

# strip matplotlib's Software tag so output bytes do not depend on the
# library patch version
_PNG_META = {"Software": None}


@dataclass(frozen=True)
class FigureSpec:
    """Input CSV paths plus the output image path for one figure."""

    inputs: tuple
    output: Path
    kind: str   # two_body | marginals | g2 | dnls


def _save(fig, output):
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output, dpi=DPI, metadata=_PNG_META)
    plt.close(fig)
    return output


def _times_of(table: Table, col: str):
    return np.unique(table.column(col))


def render_two_body(density_csv, current_csv, output):
    """Triptych rows: rho and J_t over the (x1, x2) plane at three times,
    one shared color scale per row."""
    rho_t = read_table(density_csv)
    cur_t = read_table(current_csv)
    times = _times_of(rho_t, "time")
    fig, axes = plt.subplots(2, times.size, figsize=(4*times.size, 7.6),
                             constrained_layout=True)
    axes = np.atleast_2d(axes)
    for row, (table, value, label) in enumerate(
            ((rho_t, "rho", r"$\rho_t^{(2)}$"),
             (cur_t, "j_t", r"$J_t^{(2)}$"))):
        sel_all = table.column(value)
        vmin, vmax = float(np.min(sel_all)), float(np.max(sel_all))
        mesh = None
        for col, t in enumerate(times):
            mask = table.column("time") == t
            sub = Table(table.name, table.columns, table.units,
                        {k: v[mask] for k, v in table.data.items()})
            x1, x2, grid = pivot_heatmap(sub, "x1", "x2", value)
            ax = axes[row, col]
            mesh = ax.pcolormesh(x1, x2, grid.T, cmap=CMAP, vmin=vmin,
                                 vmax=vmax, shading="nearest")
            ax.set_xlabel(r"$x_1$")
            if col == 0:
                ax.set_ylabel(r"$x_2$")
            ax.set_title(f"{label} at $t = {t:g}$")
            ax.set_aspect("equal")
        fig.colorbar(mesh, ax=list(axes[row]), shrink=0.9)
    return _save(fig, output)


def render_marginals(density_vs_x, current_vs_x, density_vs_t, current_vs_t,
                     output):
    """One-body marginal line panels: vs x1 at fixed times, vs t at fixed x1."""
    panels = (
        (read_table(density_vs_x), "time", "x1", "rho1", r"$\rho_1(x_1)$"),
        (read_table(current_vs_x), "time", "x1", "j1", r"$J_1(x_1)$"),
        (read_table(density_vs_t), "x1", "time", "rho1", r"$\rho_1(t)$"),
        (read_table(current_vs_t), "x1", "time", "j1", r"$J_1(t)$"),
    )
    fig, axes = plt.subplots(2, 2, figsize=(10, 7.5), constrained_layout=True)
    for ax, (table, group_col, x_col, y_col, label) in zip(axes.ravel(),
                                                           panels):
        groups = np.unique(table.column(group_col))
        for gval in groups:
            mask = table.column(group_col) == gval
            ax.plot(table.column(x_col)[mask], table.column(y_col)[mask],
                    label=f"{group_col} = {gval:g}")
        ax.set_xlabel(x_col if x_col != "time" else "t")
        ax.set_ylabel(label)
        ax.legend(fontsize=8)
        ax.grid(alpha=0.3)
    return _save(fig, output)


def render_g2(g2_csv, output):
    """g2(t, t') heatmap with a coincidence-line inset (masked cells blank)."""
    table = read_table(g2_csv)
    ts, tps, grid = pivot_heatmap(table, "t", "t_prime", "g2")
    _, _, mask = pivot_heatmap(table, "t", "t_prime", "masked")
    shown = np.ma.MaskedArray(grid, mask=mask > 0.5)
    fig, ax = plt.subplots(figsize=(7.2, 6), constrained_layout=True)
    mesh = ax.pcolormesh(ts, tps, shown.T, cmap=CMAP, vmin=0.0, vmax=2.0,
                         shading="nearest")
    ax.set_xlabel("$t$")
    ax.set_ylabel("$t'$")
    ax.set_title(f"$g^{{(2)}}(t, t')$ [{table.name}]")
    ax.set_aspect("equal")
    fig.colorbar(mesh, ax=ax)
    inset = ax.inset_axes([0.62, 0.76, 0.36, 0.22])
    diag = np.ma.MaskedArray(np.diag(grid), mask=np.diag(mask) > 0.5)
    inset.plot(ts, diag, lw=1.2)
    inset.set_ylim(-0.1, 2.3)
    inset.set_title("$g^{(2)}(t,t)$", fontsize=8)
    inset.tick_params(labelsize=7)
    return _save(fig, output)


def render_dnls(heatmap_csv, output):
    """Single |psi(X, T)|^2 evolution heatmap, X horizontal."""
    table = read_table(heatmap_csv)
    xs, ts, grid = pivot_heatmap(table, "X", "T", "density")
    fig, ax = plt.subplots(figsize=(8, 5), constrained_layout=True)
    mesh = ax.pcolormesh(xs, ts, grid.T, cmap=CMAP,
                         vmin=float(grid.min()), vmax=float(grid.max()),
                         shading="nearest")
    ax.set_xlabel("$X$")
    ax.set_ylabel("$T$")
    ax.set_title(r"$|\psi(X, T)|^2$")
    fig.colorbar(mesh, ax=ax)
    return _save(fig, output)


RENDERERS = {
    "two_body": (render_two_body, 2),
    "marginals": (render_marginals, 4),
    "g2": (render_g2, 1),
    "dnls": (render_dnls, 1),
}


def render(spec: FigureSpec):
    """Dispatch a FigureSpec; never recomputes physics."""
    try:
        fn, n_inputs = RENDERERS[spec.kind]
    except KeyError:
        raise SchemaError(f"unknown figure kind {spec.kind!r}") from None
    if len(spec.inputs) != n_inputs:
        raise SchemaError(
            f"{spec.kind} needs {n_inputs} input CSV(s), got {len(spec.inputs)}")
    return fn(*spec.inputs, spec.output)
