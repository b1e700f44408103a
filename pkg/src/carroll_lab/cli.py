"""Command-line orchestration: figure data, spectra, HBT, SCF, checks.

Every command resolves a flat key=value config (file via --config, overrides
via repeated --set), writes CSV files with a fixed 3-line header plus a
manifest echoing the resolved config, and is byte-identical across re-runs
with the same config and seed.  Exit codes: 0 success, 1 check failure,
2 usage error, 3 numeric error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import acceptance, coherence, dft, dnls, duality, kernels, propagator
from .core import Field, NumericError, PhysParams, TemporalGrid

FORMAT_TAG = "carroll-lab-csv v1"

PARAM_KEYS = ("m", "c", "hbar", "omega", "k_c", "omega_t", "k_t", "sigma",
              "t0", "s_rel", "g0", "lam")

COMMAND_DEFAULTS = {
    "figures-two-body": {
        "x_min": "-4.0", "x_max": "4.0", "n_heatmap": "61",
        "times": "-1.2,0.0,1.2", "n_marginal_x": "41",
        "marginal_t_min": "-4.0", "marginal_t_max": "4.0",
        "n_marginal_t": "41", "x1_fixed": "-1.0,0.0,1.0",
    },
    "dnls": {
        "t_half": str(20*np.pi), "n_points": "2048", "x_final": "10.0",
        "amplitude": "1.0", "velocity": "1.0", "snapshots": "21",
    },
    "check": {"skip": ""},
    "duality": {
        "potential": "harmonic", "e_sch": "1.75", "e0": "1.0",
        "n_table": "401",
    },
    "hbt": {
        "t_half": "6.0", "n_points": "64", "runs": "200000", "rebin": "4",
    },
    "spectrum": {
        "n_max": "4", "lams": "0.0,1.0", "quartic_states": "5",
        "quartic_points": "1024", "quartic_half_width": "8.0",
    },
    "ks": {
        "t_half": "12.0", "n_points": "256", "kappa": "0.49", "g_h": "0.4",
        "n_orbitals": "2", "mix": "0.5", "tol": "1e-10", "max_iter": "200",
    },
}


class UsageError(Exception):
    pass


def parse_config_file(path: str) -> dict:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"malformed config line: {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def resolve_config(command: str, file_cfg: dict, overrides: dict) -> dict:
    known = dict(COMMAND_DEFAULTS[command])
    merged = dict(known)
    for source in (file_cfg, overrides):
        for key, value in source.items():
            if key in PARAM_KEYS:
                merged[key] = value
            elif key in known:
                merged[key] = value
            else:
                raise UsageError(f"unknown config key {key!r} for {command}")
    return merged


def params_from_config(cfg: dict) -> PhysParams:
    kwargs = {k: float(cfg[k]) for k in PARAM_KEYS if k in cfg}
    return PhysParams(**kwargs)


def _floats(csv_value: str):
    return [float(v) for v in csv_value.split(",") if v != ""]


def fmt(x) -> str:
    return f"{float(x):.17g}"


def write_csv(path: Path, name: str, columns, units, rows):
    lines = [f"# {FORMAT_TAG} {name}",
             "# " + ",".join(columns),
             "# " + ",".join(units)]
    for row in rows:
        lines.append(",".join(fmt(v) if not isinstance(v, str) else v
                              for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_manifest(out_dir: Path, command: str, cfg: dict, seed: int):
    lines = [f"# {FORMAT_TAG} manifest", f"command={command}", f"seed={seed}"]
    for key in sorted(cfg):
        lines.append(f"{key}={cfg[key]}")
    (out_dir / "manifest.txt").write_text("\n".join(lines) + "\n")


# -- commands -------------------------------------------------------------------

def cmd_figures_two_body(cfg: dict, out: Path, seed: int) -> int:
    p = params_from_config(cfg)
    two = kernels.TwoBodySolution(
        p, f_rel=lambda v: (np.pi*p.s_rel**2)**(-0.25)
        * np.exp(-np.asarray(v)**2/(2*p.s_rel**2)))
    xs = np.linspace(float(cfg["x_min"]), float(cfg["x_max"]),
                     int(cfg["n_heatmap"]))
    times = _floats(cfg["times"])
    x1g, x2g = np.meshgrid(xs, xs, indexing="ij")

    rows_rho, rows_j = [], []
    for t in times:
        rho = two.density(x1g, x2g, t)
        cur = two.current(x1g, x2g, t)
        for i in range(xs.size):
            for j in range(xs.size):
                rows_rho.append((t, xs[i], xs[j], rho[i, j]))
                rows_j.append((t, xs[i], xs[j], cur[i, j]))
    write_csv(out/"two_body_density.csv", "two_body_density",
              ("time", "x1", "x2", "rho"), ("t", "x", "x", "1/t"), rows_rho)
    write_csv(out/"two_body_current.csv", "two_body_current",
              ("time", "x1", "x2", "j_t"), ("t", "x", "x", "1/x"), rows_j)

    x1s = np.linspace(float(cfg["x_min"]), float(cfg["x_max"]),
                      int(cfg["n_marginal_x"]))
    rows_rho, rows_j = [], []
    for t in times:
        rho1, j1 = kernels.one_body_marginals(p, x1s, t)
        rows_rho.extend((t, x, r) for x, r in zip(x1s, rho1))
        rows_j.extend((t, x, j) for x, j in zip(x1s, j1))
    write_csv(out/"marginal_density_vs_x.csv", "marginal_density_vs_x",
              ("time", "x1", "rho1"), ("t", "x", "1/t"), rows_rho)
    write_csv(out/"marginal_current_vs_x.csv", "marginal_current_vs_x",
              ("time", "x1", "j1"), ("t", "x", "1/x"), rows_j)

    ts = np.linspace(float(cfg["marginal_t_min"]), float(cfg["marginal_t_max"]),
                     int(cfg["n_marginal_t"]))
    positions = _floats(cfg["x1_fixed"])
    rows_rho, rows_j = [], []
    for x1 in positions:
        for t in ts:
            rho1, j1 = kernels.one_body_marginals(p, [x1], t)
            rows_rho.append((x1, t, rho1[0]))
            rows_j.append((x1, t, j1[0]))
    write_csv(out/"marginal_density_vs_t.csv", "marginal_density_vs_t",
              ("x1", "time", "rho1"), ("x", "t", "1/t"), rows_rho)
    write_csv(out/"marginal_current_vs_t.csv", "marginal_current_vs_t",
              ("x1", "time", "j1"), ("x", "t", "1/x"), rows_j)
    return 0


def cmd_dnls(cfg: dict, out: Path, seed: int) -> int:
    t_half = float(cfg["t_half"])
    grid = TemporalGrid(-t_half, t_half, int(cfg["n_points"]))
    psi0 = Field((grid,), dnls.solitary_wave(
        float(cfg["amplitude"]), float(cfg["velocity"]), 0.0, grid.points()))
    snapshots = []
    _, diags = dnls.evolve_dnls(
        psi0, float(cfg["x_final"]), grid.dt**2/4,
        n_snapshots=int(cfg["snapshots"]),
        observer=lambda x, f: snapshots.append((x, np.abs(f.values)**2)))
    rows = []
    ts = grid.points()
    for x, dens in snapshots:
        rows.extend((x, t, v) for t, v in zip(ts, dens))
    write_csv(out/"dnls_heatmap.csv", "dnls_heatmap",
              ("X", "T", "density"), ("1", "1", "1"), rows)
    rows = [(x, n, a, pos, w, pr) for x, n, a, pos, w, pr
            in zip(diags.x, diags.norm, diags.peak_amplitude,
                   diags.peak_position, diags.rms_width,
                   diags.participation_ratio)]
    write_csv(out/"dnls_diagnostics.csv", "dnls_diagnostics",
              ("X", "norm", "peak_amplitude", "peak_position", "rms_width",
               "participation_ratio"), ("1",)*6, rows)
    return 0


def cmd_check(cfg: dict, out: Path, seed: int) -> int:
    skip = tuple(s for s in cfg["skip"].split(",") if s)
    results = acceptance.run_all(skip=skip)
    rows = []
    for r in results:
        print(r.line())
        rows.append((r.name, "1" if r.passed else "0", r.measured,
                     r.tolerance, r.detail.replace(",", ";")))
    write_csv(out/"check_report.csv", "check_report",
              ("criterion", "passed", "measured", "tolerance", "detail"),
              ("name", "bool", "value", "value", "text"),
              [(a, b, fmt(c), fmt(d), e) for a, b, c, d, e in rows])
    return 0 if all(r.passed for r in results) else 1


def cmd_duality(cfg: dict, out: Path, seed: int) -> int:
    p = params_from_config(cfg)
    e_sch, e0 = float(cfg["e_sch"]), float(cfg["e0"])
    kind = cfg["potential"]
    if kind == "harmonic":
        v_sch = lambda x: 0.5*p.m*p.omega**2*np.asarray(x)**2
        turn = np.sqrt(2*e_sch/(p.m*p.omega**2))
        interval = (-0.75*turn, 0.75*turn)
    elif kind == "free":
        v_sch = lambda x: 0.0*np.asarray(x)
        interval = (-3.0, 3.0)
    else:
        raise UsageError(f"unknown potential {kind!r}")
    inp = duality.DualityInput(v_sch=v_sch, e_sch=e_sch, e0=e0,
                               x_interval=interval, anchor=0.0,
                               mass=p.m, hbar=p.hbar)
    m = duality.build_map(inp)
    master = duality.verify_inverse_master(m, inp)
    pure = duality.verify_pure_schwarzian(m, inp)
    xs = np.linspace(interval[0], interval[1], int(cfg["n_table"]))
    tp = m.tau_derivatives(xs)[0]
    vc = duality.carroll_potential(m, m.tau_of(xs))
    rows = [(x, t, d, v, c.imag) for x, t, d, v, c
            in zip(xs, m.tau_of(xs), tp, v_sch(xs), vc)]
    write_csv(out/"duality_map.csv", "duality_map",
              ("x", "tau", "tau_prime", "V_sch", "Im_V_car"),
              ("x", "t", "t/x", "energy", "energy"), rows)
    write_csv(out/"duality_residuals.csv", "duality_residuals",
              ("check", "residual"), ("name", "value"),
              [("inverse_master", fmt(master)), ("pure_schwarzian", fmt(pure))])
    return 0


def _hbt_orbitals(grid: TemporalGrid, statistics: str) -> coherence.OrbitalSet:
    t = grid.points()
    a = np.array([propagator.hermite_mode(k, t, 1.0) for k in range(2)]).T
    q, _ = np.linalg.qr(a)
    return coherence.OrbitalSet(
        grid, tuple(q[:, k]/np.sqrt(grid.dt) for k in range(2)),
        (1.0, 1.0), statistics)


def cmd_hbt(cfg: dict, out: Path, seed: int) -> int:
    grid = TemporalGrid(-float(cfg["t_half"]), float(cfg["t_half"]),
                        int(cfg["n_points"]))
    ts = grid.points()
    for statistics in ("fermi", "bose"):
        data = coherence.coherence_from_orbitals(_hbt_orbitals(grid, statistics))
        rows = []
        mask = data.g2.mask
        vals = data.g2.filled(0.0)
        for i in range(grid.n_points):
            for j in range(grid.n_points):
                rows.append((ts[i], ts[j], vals[i, j], 1.0 if mask[i, j] else 0.0))
        write_csv(out/f"g2_{statistics}.csv", f"g2_{statistics}",
                  ("t", "t_prime", "g2", "masked"),
                  ("t", "t", "1", "bool"), rows)
    data = coherence.coherence_from_orbitals(_hbt_orbitals(grid, "fermi"))
    samp = coherence.sample_arrivals(data, int(cfg["runs"]), seed=seed,
                                     rebin=int(cfg["rebin"]))
    rows = []
    g2v, g2m = samp.g2.filled(0.0), samp.g2.mask
    sv = samp.sigma.filled(0.0)
    nb = samp.bin_centers.size
    for i in range(nb):
        for j in range(nb):
            rows.append((samp.bin_centers[i], samp.bin_centers[j],
                         samp.pairs[i, j], g2v[i, j], sv[i, j],
                         1.0 if g2m[i, j] else 0.0))
    write_csv(out/"hbt_sampled.csv", "hbt_sampled",
              ("t", "t_prime", "pairs", "g2", "sigma", "masked"),
              ("t", "t", "count", "1", "1", "bool"), rows)
    write_csv(out/"hbt_singles.csv", "hbt_singles",
              ("t", "count"), ("t", "count"),
              list(zip(samp.bin_centers, samp.singles)))
    return 0


def cmd_spectrum(cfg: dict, out: Path, seed: int) -> int:
    p = params_from_config(cfg)
    rows = []
    for n in range(1, int(cfg["n_max"]) + 1):
        spec = propagator.oscillator_spectrum(p, n)
        rows.extend((n, alpha, w)
                    for alpha, w in enumerate(spec.frequencies))
    write_csv(out/"oscillator_modes.csv", "oscillator_modes",
              ("N", "mode", "omega_alpha"), ("count", "index", "accel"), rows)
    grid = TemporalGrid(-float(cfg["quartic_half_width"]),
                        float(cfg["quartic_half_width"]),
                        int(cfg["quartic_points"]))
    rows = []
    for lam in _floats(cfg["lams"]):
        qp = propagator.QuarticEigenproblem(p, lam, grid)
        n_states = int(cfg["quartic_states"])
        dense, _ = propagator.quartic_eigensolve(qp, n_states, "spectral")
        shoot = propagator.quartic_shooting(qp, n_states)
        rows.extend((lam, k, dense[k], shoot[k], abs(dense[k] - shoot[k]))
                    for k in range(n_states))
    write_csv(out/"quartic_spectrum.csv", "quartic_spectrum",
              ("lambda", "state", "E_dense", "E_shooting", "difference"),
              ("energy", "index", "energy", "energy", "energy"), rows)
    return 0


def cmd_ks(cfg: dict, out: Path, seed: int) -> int:
    p = params_from_config(cfg)
    grid = TemporalGrid(-float(cfg["t_half"]), float(cfg["t_half"]),
                        int(cfg["n_points"]))
    t = grid.points()
    kappa = float(cfg["kappa"])
    phi_ext = 0.5*kappa*t**2
    n_orb = int(cfg["n_orbitals"])
    func = dft.hartree_toy_functional(phi_ext, g_h=float(cfg["g_h"]))
    sys0 = dft.KsSystem(p, grid, phi_ext, np.zeros_like(t), (1.0,)*n_orb)
    try:
        res = dft.scf_loop(sys0, func, mix=float(cfg["mix"]),
                           tol=float(cfg["tol"]),
                           max_iter=int(cfg["max_iter"]))
    except dft.NotConverged as exc:
        print(f"SCF did not converge; history tail {exc.history[-3:]}",
              file=sys.stderr)
        return 3
    write_csv(out/"ks_density.csv", "ks_density",
              ("t", "n", "j_t"), ("t", "1/t", "1/x"),
              list(zip(t, res.densities.n, res.densities.j_t)))
    write_csv(out/"ks_eigenvalues.csv", "ks_eigenvalues",
              ("state", "epsilon", "occupation"),
              ("index", "energy", "1"),
              [(k, res.eigenvalues[k], res.system.occupations[k])
               for k in range(n_orb)])
    write_csv(out/"ks_history.csv", "ks_history",
              ("iteration", "density_change"), ("index", "value"),
              [(i + 1, h if np.isfinite(h) else "inf")
               for i, h in enumerate(res.history)])
    return 0


COMMANDS = {
    "figures-two-body": cmd_figures_two_body,
    "dnls": cmd_dnls,
    "check": cmd_check,
    "duality": cmd_duality,
    "hbt": cmd_hbt,
    "spectrum": cmd_spectrum,
    "ks": cmd_ks,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="carroll-lab",
        description="equal-x many-body laboratory: figure data and checks")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--set", dest="overrides", action="append",
                        default=[], metavar="KEY=VALUE")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0,) else 0

    try:
        file_cfg = parse_config_file(args.config) if args.config else {}
        overrides = {}
        for item in args.overrides:
            if "=" not in item:
                raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
            key, value = item.split("=", 1)
            overrides[key] = value
        cfg = resolve_config(args.command, file_cfg, overrides)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        rc = COMMANDS[args.command](cfg, out, args.seed)
    except (NumericError, FileNotFoundError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    write_manifest(out, args.command, cfg, args.seed)
    return rc


if __name__ == "__main__":
    sys.exit(main())
