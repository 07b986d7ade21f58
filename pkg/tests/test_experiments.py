"""Reduced-resolution runs of the experiment pipeline (n = 2^13, t_end = 16)."""

import dataclasses
import json

import numpy as np
import pytest

from gdnlslab.config import config_from_dict
from gdnlslab.experiments import (EXIT_FAIL, EXIT_PASS, EXIT_RUNTIME, Row, analyze, prepare,
                                  run_experiment, snapshot_schedule, velocity_grid)
from gdnlslab.io import read_snapshot

REDUCED = {"n": 2 ** 13, "t_end": 16.0, "dt": 0.02}


def reduced(name, tmp, **extra):
    raw = {"name": name, "output_dir": str(tmp / name), "sim": dict(REDUCED),
           "packet": {"n_velocities": 65}}
    raw.update(extra)
    return config_from_dict(raw)


@pytest.fixture(scope="module")
def sigma1(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("sigma1")
    return prepare(reduced("E2", tmp)), tmp


def analyzed(data, name):
    data.cfg = dataclasses.replace(data.cfg, name=name)
    return analyze(data)


class TestRow:
    def test_bounds(self):
        assert Row("a", 0.5, 0.0, 1.0).passed
        assert not Row("a", 1.5, 0.0, 1.0).passed
        assert not Row("a", float("nan")).passed

    def test_gating(self):
        assert Row("a", 1.0, criterion=3).gating
        assert not Row("a", 1.0).gating


def test_schedule_dyadic_dense():
    cfg = reduced("E2", __import__("pathlib").Path("/tmp"))
    dyadic, stencil = snapshot_schedule(cfg)
    assert dyadic[0] == 0.0 and dyadic[-1] == 16.0
    assert 2.0 ** (1 / 8) in dyadic
    assert len([t for t in dyadic if 1 <= t < 2]) == 8
    assert 1.0 - 1e-3 in stencil and 8.0 + 1e-3 in stencil


def test_velocity_grid_stays_in_box(sigma1):
    data, _ = sigma1
    v = data.velocities
    g = data.u0.grid
    assert len(v) == 65
    assert np.all(np.abs(v) * 16 + 4 < g.length / 2)


def test_e2_reduced(sigma1):
    res = analyzed(sigma1[0], "E2")
    assert res.status == EXIT_PASS, res.failed_rows
    assert res.row("K_u").value < 10
    assert res.row("lu_growth_exponent").value < 0.05
    assert res.row("lu_equation_residual_max").value < 1e-3


def test_e3_reduced(sigma1):
    res = analyzed(sigma1[0], "E3")
    assert res.row("gamma_cross_check").passed
    assert res.row("packet_residual_slope").passed
    assert res.row("w_difference").passed
    assert res.row("err_x_inf_slope").passed
    # the Fourier-side slope needs the full-length run; here it is only reported
    assert np.isfinite(res.row("err_xi_l2_slope").value)


def test_e5_reduced(sigma1):
    res = analyzed(sigma1[0], "E5")
    assert res.status == EXIT_PASS
    assert res.row("remainder_slope").value <= -1.0


def test_e1_zero_data(tmp_path):
    cfg = reduced("E1", tmp_path, data="zero", sim={"n": 2 ** 11, "t_end": 16.0, "dt": 0.05})
    res = run_experiment(cfg)
    assert res.status == EXIT_PASS, res.failed_rows
    assert res.row("dispersive_constant").value == 0.0
    summary = json.loads((tmp_path / "E1" / "summary.json").read_text())
    assert summary["status"] == 0


def test_e1_reduced(tmp_path):
    res = run_experiment(reduced("E1", tmp_path))
    assert res.status == EXIT_PASS, res.failed_rows
    out = tmp_path / "E1"
    for name in ("timeseries.csv", "rows.csv", "summary.json", "metadata.json",
                 "weighted_sup.svg", "sup_decay.svg"):
        assert (out / name).exists(), name
    snap = read_snapshot(out / "snapshots" / "t00016.000000.gdnl")
    assert snap.time == 16.0


def test_outputs_are_deterministic(tmp_path):
    sim = {"n": 2 ** 11, "t_end": 4.0, "dt": 0.02}
    a = run_experiment(reduced("E2", tmp_path / "a", sim=sim))
    b = run_experiment(reduced("E2", tmp_path / "b", sim=sim))
    assert a.status == b.status
    for name in ("timeseries.csv", "rows.csv"):
        assert (tmp_path / "a" / "E2" / name).read_bytes() == (tmp_path / "b" / "E2" / name).read_bytes()
    sa, sb = (json.loads((tmp_path / k / "E2" / "summary.json").read_text()) for k in "ab")
    sa["config"].pop("output_dir")
    sb["config"].pop("output_dir")
    assert sa == sb


def test_runtime_failure_is_recorded(tmp_path):
    # a box far too small for t_end trips the tail guard
    cfg = reduced("E2", tmp_path, sim={"n": 2 ** 7, "length": 40.0, "t_end": 16.0, "dt": 0.02})
    res = run_experiment(cfg)
    assert res.status == EXIT_RUNTIME
    assert res.failure["kind"] == "tail-mass"
    summary = json.loads((tmp_path / "E2" / "summary.json").read_text())
    assert summary["failure"]["kind"] == "tail-mass"


def test_acceptance_failure_exit_code():
    rows = [Row("x", 2.0, None, 1.0, 5)]
    from gdnlslab.experiments import _status
    assert _status(rows) == EXIT_FAIL
    assert _status([Row("x", 2.0, None, 1.0)]) == EXIT_PASS
