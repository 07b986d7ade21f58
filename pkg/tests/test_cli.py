import json

import numpy as np
import pytest
from click.testing import CliRunner

from gdnlslab import __version__
from gdnlslab.cli import cli
from gdnlslab.exact import gaussian_exact
from gdnlslab.grid import Grid1D
from gdnlslab.io import read_snapshot, write_csv, write_snapshot


@pytest.fixture
def runner():
    return CliRunner()


def test_version(runner):
    res = runner.invoke(cli, ["--version"])
    assert res.exit_code == 0 and __version__ in res.output


@pytest.mark.parametrize("cmd", ["experiment", "simulate", "soliton", "packet", "fit", "norms"])
def test_help(runner, cmd):
    res = runner.invoke(cli, [cmd, "--help"])
    assert res.exit_code == 0


def test_help_names_config_keys(runner):
    out = runner.invoke(cli, ["experiment", "--help"]).output
    assert "sim.dt" in out and "sim.t_end" in out


def test_emit_config(runner, tmp_path):
    res = runner.invoke(cli, ["experiment", "--name", "E3", "--n", "1024", "--emit-config"])
    assert res.exit_code == 0
    assert "n: 1024" in res.output and "name: E3" in res.output
    path = tmp_path / "c.yaml"
    path.write_text(res.output)
    again = runner.invoke(cli, ["experiment", "--config", str(path), "--emit-config"])
    assert again.output == res.output


def test_emit_config_epsilon_override(runner, tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text(runner.invoke(cli, ["experiment", "--name", "E2", "--emit-config"]).output)
    res = runner.invoke(cli, ["experiment", "--config", str(path), "--epsilon", "0.1",
                              "--emit-config"])
    assert "d_constant: 1.0" in res.output


def test_invalid_config_exit_2(runner):
    res = runner.invoke(cli, ["experiment", "--name", "E2", "--epsilon", "0.5"])
    assert res.exit_code == 2
    assert "epsilon" in res.output


def test_experiment_zero_data(runner, tmp_path):
    res = runner.invoke(cli, ["experiment", "--name", "E1", "--data", "zero", "--n", "2048",
                              "--dt", "0.05", "--t-end", "16", "--output-dir", str(tmp_path)])
    assert res.exit_code == 0, res.output
    assert "PASS   c4 dispersive_constant" in res.output
    assert (tmp_path / "summary.json").exists()


def test_simulate(runner, tmp_path):
    res = runner.invoke(cli, ["simulate", "--name", "E2", "--n", "2048", "--dt", "0.005", "--t-end", "2",
                              "--output-dir", str(tmp_path)])
    assert res.exit_code == 0, res.output
    assert (tmp_path / "timeseries.csv").exists()
    assert read_snapshot(tmp_path / "snapshots" / "t00002.000000.gdnl").time == 2.0


def test_soliton(runner, tmp_path):
    out = tmp_path / "phi.gdnl"
    res = runner.invoke(cli, ["soliton", "--sigma", "1", "--omega", "0.25", "--c", "0",
                              "--out", str(out)])
    assert res.exit_code == 0
    vals = dict(line.split(" = ") for line in res.output.strip().splitlines())
    assert float(vals["mass_quadrature"]) == pytest.approx(2 * np.pi, abs=1e-8)
    assert out.exists()


def test_soliton_bad_params(runner):
    res = runner.invoke(cli, ["soliton", "--sigma", "1", "--omega", "1", "--c", "3"])
    assert res.exit_code == 2


def test_packet_and_norms(runner, tmp_path):
    g = Grid1D(2048, 400.0)
    path = write_snapshot(gaussian_exact(0.5, 8.0, g), tmp_path / "u.gdnl", 1.0)
    res = runner.invoke(cli, ["packet", str(path), "--count", "5", "--fourier"])
    assert res.exit_code == 0, res.output
    lines = res.output.strip().splitlines()
    assert lines[0] == "v,re_gamma,im_gamma,re_gamma_fourier,im_gamma_fourier"
    assert len(lines) == 6
    row = [float(x) for x in lines[3].split(",")]
    assert row[1] == pytest.approx(row[3], abs=1e-6) and row[2] == pytest.approx(row[4], abs=1e-6)
    res = runner.invoke(cli, ["norms", str(path), "--lorentz", "2", "2"])
    assert res.exit_code == 0
    vals = dict(line.split(" = ") for line in res.output.strip().splitlines())
    assert float(vals["L(2,2)"]) == pytest.approx(float(vals["L2"]), rel=1e-12)


def test_fit(runner, tmp_path):
    t = np.geomspace(1, 256, 50)
    path = write_csv(tmp_path / "s.csv", ["t", "sup"], zip(t, 2 * t ** -0.5))
    res = runner.invoke(cli, ["fit", str(path), "--t-min", "16"])
    assert res.exit_code == 0
    assert json.loads(res.output)["exponent"] == pytest.approx(-0.5, abs=1e-9)


def test_fit_missing_column(runner, tmp_path):
    path = write_csv(tmp_path / "s.csv", ["t", "sup"], [(1.0, 1.0)])
    assert runner.invoke(cli, ["fit", str(path), "--column", "nope"]).exit_code == 2


def test_bad_snapshot(runner, tmp_path):
    path = tmp_path / "bad.gdnl"
    path.write_bytes(b"nope" * 20)
    assert runner.invoke(cli, ["norms", str(path)]).exit_code == 2
