"""Command line interface: ``gdnlslab <subcommand>``.

Exit codes: 0 pass, 1 acceptance failure, 2 runtime failure (bad input,
solver abort, unreadable files).
"""

from __future__ import annotations

import dataclasses
import json
import logging
import sys

import click
import numpy as np

from .config import ExperimentConfig, config_from_dict, config_to_dict, emit_config, parse_config
from .errors import LabError
from .experiments import (EXIT_PASS, EXIT_RUNTIME, ExperimentResult, RunData,
                          run_experiment, simulate as simulate_run, write_outputs)

__all__ = ["main", "cli"]


def _fail(msg: str, code: int = EXIT_RUNTIME):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _load_config(path, name, overrides: dict) -> ExperimentConfig:
    """Config from ``path`` (or defaults for ``name``) with flag overrides applied."""
    if path is not None:
        raw = config_to_dict(parse_config(path))
        if name is not None and name != raw["name"]:
            _fail(f"--name {name} disagrees with the config file ({raw['name']})")
    else:
        raw = {"name": name or "E1"}
    for key, value in overrides.items():
        if value is None:
            continue
        if "." in key:
            section, sub = key.split(".", 1)
            raw.setdefault(section, {})[sub] = value
        else:
            raw[key] = value
    if path is not None:
        # re-derive defaults that depend on edited keys
        if "epsilon" in overrides and overrides["epsilon"] is not None and "d_constant" not in overrides:
            raw["d_constant"] = None
    return config_from_dict(raw)


def _sim_options(f):
    opts = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     help="YAML config file (schema in gdnlslab.config)."),
        click.option("--name", type=click.Choice(["E1", "E2", "E3", "E4", "E5"]),
                     help="Experiment name [config key: name]."),
        click.option("--sigma", type=float, help="Nonlinearity power [config key: sigma]."),
        click.option("--epsilon", type=float, help="Data size [config key: epsilon]."),
        click.option("--data", type=click.Choice(["gaussian", "chirped", "zero"]),
                     help="Initial data shape [config key: data]."),
        click.option("--n", type=int, help="Grid points [config key: sim.n]."),
        click.option("--length", type=float, help="Box length [config key: sim.length]."),
        click.option("--dt", type=float, help="Time step [config key: sim.dt]."),
        click.option("--t-end", "t_end", type=float, help="Final time [config key: sim.t_end]."),
        click.option("--scheme", type=click.Choice(["etdrk4", "ifrk4"]),
                     help="Time stepper [config key: sim.scheme]."),
        click.option("--output-dir", "output_dir", type=click.Path(file_okay=False),
                     help="Output directory [config key: output_dir]."),
        click.option("--seed", type=int, help="Random seed [config key: seed]."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _overrides(kw) -> dict:
    return {"sigma": kw["sigma"], "epsilon": kw["epsilon"], "data": kw["data"],
            "sim.n": kw["n"], "sim.length": kw["length"], "sim.dt": kw["dt"],
            "sim.t_end": kw["t_end"], "sim.scheme": kw["scheme"],
            "output_dir": kw["output_dir"], "seed": kw["seed"]}


@click.group()
@click.option("-v", "--verbose", count=True, help="Log progress (-vv for debug).")
@click.version_option(package_name="gdnlslab")
def cli(verbose):
    """Pseudospectral laboratory for i u_t + u_xx + i(|u|^(2 sigma) u)_x = 0."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@cli.command("experiment")
@_sim_options
@click.option("--emit-config", "emit", is_flag=True,
              help="Print the fully materialized config and exit.")
def experiment(config_path, name, emit, **kw):
    """Run experiment E1-E5 and write its report; exit status 0/1/2."""
    try:
        cfg = _load_config(config_path, name, _overrides(kw))
    except LabError as exc:
        _fail(str(exc))
    if emit:
        click.echo(emit_config(cfg), nl=False)
        return
    res = run_experiment(cfg)
    for r in res.rows:
        tag = "PASS" if r.passed else "FAIL"
        crit = f"c{r.criterion}" if r.criterion is not None else "--"
        click.echo(f"{tag} {crit:>4} {r.name} = {r.value:.6g}")
    if res.failure:
        click.echo(f"runtime failure: {json.dumps(res.failure)}", err=True)
    click.echo(f"report written to {cfg.output_dir}")
    sys.exit(res.status)


@cli.command()
@_sim_options
def simulate(config_path, name, **kw):
    """Integrate the configured initial data; write the time series and snapshots."""
    try:
        cfg = _load_config(config_path, name, _overrides(kw))
        if cfg.name == "E4":
            _fail("E4 has no simulated trajectory; use the soliton subcommand")
        traj = simulate_run(cfg)
        data = RunData(cfg, traj)
        res = ExperimentResult(cfg.name, EXIT_PASS if traj.accepted else EXIT_RUNTIME, [])
        if not traj.accepted:
            res.failure = {"kind": traj.aborted[1], "time": traj.aborted[0]}
        res.series = data.series
        write_outputs(cfg, res, data)
    except LabError as exc:
        _fail(str(exc))
    click.echo(f"{len(traj.times)} snapshots, accepted={traj.accepted}; "
               f"written to {cfg.output_dir}")
    sys.exit(res.status)


@cli.command()
@click.option("--sigma", type=float, required=True, help="Nonlinearity power.")
@click.option("--omega", type=float, required=True, help="Frequency omega > 0.")
@click.option("--c", "c", type=float, required=True, help="Speed, c^2 < 4 omega.")
@click.option("--gauge", type=click.Choice(["flow", "nondivergence"]), default="flow",
              show_default=True, help="Phase convention of the closed form.")
@click.option("--n", type=int, help="Grid points (default: chosen from the profile).")
@click.option("--out", type=click.Path(dir_okay=False), help="Write the profile as a snapshot.")
def soliton(sigma, omega, c, gauge, n, out):
    """Solitary wave phi_{omega,c}: mass, virial terms and H^1 norm."""
    from .exact import SolitonParams, soliton_field, soliton_grid, soliton_mass_formula
    from .grid import derivative
    from .invariants import mass
    from .io import write_snapshot
    from .norms import lp_norm, sobolev_norm
    try:
        p = SolitonParams(sigma, omega, c, gauge)
        g = soliton_grid(p, n)
        f = soliton_field(p, g)
        if out:
            write_snapshot(f, out, sigma)
    except LabError as exc:
        _fail(str(exc))
    rows = {
        "n": g.n, "length": g.length,
        "mass_quadrature": mass(f), "mass_formula": soliton_mass_formula(p),
        "dx_phi_l2_sq": lp_norm(derivative(f, 1), 2) ** 2, "omega_mass": omega * mass(f),
        "h1_norm": sobolev_norm(f, 1.0), "sup": lp_norm(f, np.inf),
    }
    for k, v in rows.items():
        click.echo(f"{k} = {v:.17g}" if isinstance(v, float) else f"{k} = {v}")


@cli.command()
@click.argument("snapshot", type=click.Path(exists=True, dir_okay=False))
@click.option("--vmin", type=float, default=-2.0, show_default=True, help="Smallest velocity.")
@click.option("--vmax", type=float, default=2.0, show_default=True, help="Largest velocity.")
@click.option("--count", type=int, default=65, show_default=True,
              help="Velocities [config key: packet.n_velocities].")
@click.option("--points-per-packet", type=int, default=64, show_default=True,
              help="Quadrature refinement [config key: packet.points_per_packet].")
@click.option("--fourier", is_flag=True, help="Also evaluate gamma from the spectrum.")
@click.option("--out", type=click.Path(dir_okay=False), help="CSV output (default: stdout).")
def packet(snapshot, vmin, vmax, count, points_per_packet, fourier, out):
    """Asymptotic profile gamma(t, v) of a snapshot."""
    from .io import format_float, read_snapshot, write_csv
    from .packets import PacketConfig, profile, profile_fourier
    try:
        f = read_snapshot(snapshot)
        cfg = PacketConfig(points_per_packet=points_per_packet)
        v = np.linspace(vmin, vmax, count)
        p = profile(f, v, cfg)
        cols = ["v", "re_gamma", "im_gamma"]
        data = [v, p.gamma.real, p.gamma.imag]
        if fourier:
            q = profile_fourier(f, v, cfg)
            cols += ["re_gamma_fourier", "im_gamma_fourier"]
            data += [q.gamma.real, q.gamma.imag]
    except LabError as exc:
        _fail(str(exc))
    if out:
        write_csv(out, cols, zip(*data))
    else:
        click.echo(",".join(cols))
        for row in zip(*data):
            click.echo(",".join(format_float(x) for x in row))


@cli.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--column", default="sup", show_default=True, help="Column to fit.")
@click.option("--time-column", default="t", show_default=True)
@click.option("--t-min", type=float, help="Window start (default t_max/16).")
@click.option("--t-max", type=float, help="Window end (default t_max).")
def fit(csv_path, column, time_column, t_min, t_max):
    """Power-law decay fit of one column of a CSV time series."""
    from .asymptotics import fit_decay
    from .io import read_csv
    header, rows = read_csv(csv_path)
    try:
        ti, ci = header.index(time_column), header.index(column)
    except ValueError:
        _fail(f"columns {time_column!r} / {column!r} not in {header}")
    t = np.array([float(r[ti]) for r in rows])
    y = np.array([float(r[ci]) for r in rows])
    window = None
    if t_min is not None or t_max is not None:
        window = (t_min if t_min is not None else max(1.0, t.max() / 16),
                  t_max if t_max is not None else float(t.max()))
    try:
        res = fit_decay(t, y, window)
    except LabError as exc:
        _fail(str(exc))
    click.echo(json.dumps(dataclasses.asdict(res)))


@cli.command()
@click.argument("snapshot", type=click.Path(exists=True, dir_okay=False))
@click.option("--p", "ps", type=float, multiple=True, default=(1.0, 2.0, float("inf")),
              show_default=True, help="L^p exponents.")
@click.option("--s", "ss", type=float, multiple=True, default=(1.0,), show_default=True,
              help="Sobolev exponents.")
@click.option("--lorentz", nargs=2, type=float, multiple=True,
              help="Lorentz (p, q) pairs, repeatable.")
def norms(snapshot, ps, ss, lorentz):
    """Norms of a snapshot file."""
    from .io import read_snapshot_with_header
    from .norms import lorentz_norm, lp_norm, sobolev_norm
    try:
        f, head = read_snapshot_with_header(snapshot)
        out = {"t": head.time, "n": head.n, "length": head.length, "sigma": head.sigma}
        for p in ps:
            out[f"L{p:g}"] = lp_norm(f, p)
        for s in ss:
            out[f"H{s:g}"] = sobolev_norm(f, s)
        for p, q in lorentz:
            out[f"L({p:g},{q:g})"] = lorentz_norm(f, p, q)
    except LabError as exc:
        _fail(str(exc))
    for k, v in out.items():
        click.echo(f"{k} = {v!r}")


def main(argv=None):
    cli.main(args=argv, prog_name="gdnlslab")


if __name__ == "__main__":
    main()
