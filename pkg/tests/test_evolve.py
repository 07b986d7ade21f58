import numpy as np
import pytest

from gdnlslab.errors import BlowUpError, ConsistencyError, DomainError
from gdnlslab.evolve import (SimConfig, box_length_for, edge_mass_fraction, nonlinear_term,
                             pde_residual, run, step)
from gdnlslab.exact import SolitonParams, free_propagate, soliton_field, soliton_orbit
from gdnlslab.grid import Field, Grid1D, dealias, from_spectrum, to_spectrum


def projected(f, frac=2 / 3):
    return from_spectrum(dealias(to_spectrum(f), frac))


class TestConfig:
    def test_dt_ceiling(self):
        g = Grid1D(64, 2 * np.pi)
        with pytest.raises(DomainError):
            SimConfig(1.0, g, 1.0, 1.0)

    @pytest.mark.parametrize("kw", [dict(sigma=0.0), dict(dt=0.0), dict(t_end=-1.0),
                                    dict(dealias_fraction=0.0), dict(scheme="euler"),
                                    dict(snapshot_times=(2.0,))])
    def test_invalid(self, kw):
        base = dict(sigma=1.0, grid=Grid1D(64, 40.0), dt=0.01, t_end=1.0)
        base.update(kw)
        with pytest.raises(DomainError):
            SimConfig(**base)

    def test_snapshots_sorted(self):
        cfg = SimConfig(1.0, Grid1D(64, 40.0), 0.01, 1.0, snapshot_times=(0.5, 0.25))
        assert cfg.snapshot_times == (0.25, 0.5)


class TestNonlinear:
    def test_zero(self):
        f = Field(Grid1D(32, 5.0), 0.0, np.zeros(32))
        assert not np.any(nonlinear_term(f, 1.0).samples)

    def test_constant(self):
        f = Field(Grid1D(32, 5.0), 0.0, np.full(32, 0.7 - 0.2j))
        assert np.abs(nonlinear_term(f, 1.0).samples).max() < 1e-14

    @pytest.mark.parametrize("k", [1, 3, -2])
    def test_plane_wave(self, k):
        g = Grid1D(32, 2 * np.pi)
        a = 0.8 + 0.3j
        u = a * np.exp(1j * k * g.x)
        out = nonlinear_term(Field(g, 0.0, u), 1.0)
        expected = -1j * k * abs(a) ** 2 * u
        assert np.abs(np.fft.fft(out.samples) - np.fft.fft(expected)).max() < 1e-12

    def test_bad_sigma(self):
        with pytest.raises(DomainError):
            nonlinear_term(Field(Grid1D(32, 5.0), 0.0, np.zeros(32)), 0.0)


class TestStep:
    @pytest.mark.parametrize("scheme", ["etdrk4", "ifrk4"])
    def test_zero(self, scheme):
        g = Grid1D(64, 40.0)
        cfg = SimConfig(1.0, g, 0.01, 1.0, scheme=scheme)
        out = step(Field(g, 0.0, np.zeros(64)), cfg)
        assert not np.any(out.samples)
        assert out.time == pytest.approx(0.01)

    @pytest.mark.parametrize("scheme", ["etdrk4", "ifrk4"])
    def test_linear_regime(self, scheme):
        g = Grid1D(256, 40.0)
        f = projected(Field(g, 0.0, 1e-9 * np.exp(-g.x ** 2)))
        cfg = SimConfig(1.0, g, 0.005, 1.0, scheme=scheme)
        assert np.abs(step(f, cfg).samples - free_propagate(f, 0.005).samples).max() < 1e-20

    def test_grid_mismatch(self):
        cfg = SimConfig(1.0, Grid1D(64, 40.0), 0.01, 1.0)
        with pytest.raises(ConsistencyError):
            step(Field(Grid1D(64, 20.0), 0.0, np.zeros(64)), cfg)

    def test_non_finite(self):
        g = Grid1D(64, 40.0)
        with pytest.raises(BlowUpError):
            step(Field(g, 0.0, np.full(64, np.nan)), SimConfig(1.0, g, 0.01, 1.0))

    @pytest.mark.parametrize("scheme", ["etdrk4", "ifrk4"])
    def test_local_order(self, scheme):
        # one-step error against the exact orbit scales like dt^5
        p = SolitonParams(1.0, 0.25, 0.0)
        g = Grid1D(1024, 120.0)
        u0 = soliton_field(p, g)
        errs = []
        for h in (0.0128, 0.0064):
            cfg = SimConfig(1.0, g, h, h, dealias_fraction=1.0, scheme=scheme)
            errs.append(np.abs(step(u0, cfg).samples - soliton_orbit(p, h, g).samples).max())
        assert np.log2(errs[0] / errs[1]) >= 3.8


class TestRun:
    def test_zero_t_end(self):
        g = Grid1D(64, 40.0)
        traj = run(Field(g, 0.0, np.exp(-g.x ** 2)), SimConfig(1.0, g, 0.01, 0.0))
        assert list(traj.times) == [0.0]
        assert traj.accepted

    def test_hits_snapshot_times(self):
        g = Grid1D(128, 40.0)
        cfg = SimConfig(1.0, g, 0.03, 1.0, snapshot_times=(0.1, 0.25, 0.5))
        traj = run(projected(Field(g, 0.0, 0.1 * np.exp(-g.x ** 2))), cfg)
        assert np.allclose(traj.times, [0.0, 0.1, 0.25, 0.5, 1.0], atol=1e-12)
        assert len(traj.reports) == 5

    def test_tail_guard_aborts(self):
        g = Grid1D(128, 20.0)
        cfg = SimConfig(1.0, g, 0.01, 10.0, snapshot_times=tuple(np.arange(1, 10)))
        traj = run(projected(Field(g, 0.0, np.exp(-4 * g.x ** 2))), cfg)
        assert not traj.accepted
        assert traj.aborted[1] == "tail-mass"
        assert all(e <= cfg.tail_mass_tol for e in traj.edge_fractions[:-1])

    def test_accepted_respects_guard(self):
        g = Grid1D(512, 200.0)
        cfg = SimConfig(1.0, g, 0.02, 5.0, snapshot_times=tuple(np.arange(0.5, 5, 0.5)))
        traj = run(projected(Field(g, 0.0, 0.1 * np.exp(-0.25 * g.x ** 2))), cfg)
        assert traj.accepted
        assert max(traj.edge_fractions) <= cfg.tail_mass_tol

    def test_small_gaussian_sigma2(self):
        g = Grid1D(2048, 1200.0)
        cfg = SimConfig(2.0, g, 0.05, 50.0, snapshot_times=(10.0, 25.0))
        traj = run(projected(Field(g, 0.0, 0.05 * np.exp(-0.5 * g.x ** 2))), cfg)
        assert traj.accepted
        assert max(r.relative_mass_drift for r in traj.reports) < 1e-8

    def test_spatial_convergence(self):
        out = []
        for n in (256, 512):
            g = Grid1D(n, 60.0)
            u0 = Field(g, 0.0, 0.1 * np.exp(-g.x ** 2 / 2))
            out.append(run(u0, SimConfig(1.0, g, 1e-3, 1.0, dealias_fraction=1.0)).at(1.0))
        coarse, fine = out
        assert np.abs(fine.samples[::2] - coarse.samples).max() < 1e-9

    def test_soliton_short(self):
        p = SolitonParams(1.5, 1.0, 1.0)
        g = Grid1D(2 ** 12, 80 * np.pi)
        cfg = SimConfig(1.5, g, 1e-3, 0.5, dealias_fraction=0.9)
        traj = run(soliton_field(p, g), cfg)
        assert np.abs(traj.at(0.5).samples - soliton_orbit(p, 0.5, g).samples).max() < 1e-5


class TestResidual:
    def test_zero(self):
        g = Grid1D(32, 5.0)
        z = Field(g, 0.0, np.zeros(32))
        assert pde_residual(z, Field(g, 0.1, np.zeros(32)), 1.0) == 0.0

    def test_same_time(self):
        g = Grid1D(32, 5.0)
        z = Field(g, 0.0, np.zeros(32))
        with pytest.raises(DomainError):
            pde_residual(z, z, 1.0)

    @pytest.mark.parametrize("amp", [1e-2, 1e-3])
    def test_linear_dominated_by_nonlinearity(self, amp):
        g = Grid1D(512, 60.0)
        a = Field(g, 0.0, amp * np.exp(-g.x ** 2))
        b = free_propagate(a, 1e-4)
        r = pde_residual(a, b, 1.0)
        assert 0.1 * amp ** 3 < r < 10 * amp ** 3

    def test_soliton(self):
        p = SolitonParams(1.0, 0.25, 0.0)
        g = Grid1D(1024, 120.0)
        a, b = soliton_orbit(p, 2.0, g), soliton_orbit(p, 2.0 + 1e-4, g)
        assert pde_residual(a, b, 1.0) < 1e-5


def test_edge_fraction_zero_field():
    assert edge_mass_fraction(Field(Grid1D(32, 5.0), 0.0, np.zeros(32))) == 0.0


def test_box_length_scales_with_time():
    g = Grid1D(512, 40.0)
    f = Field(g, 0.0, np.exp(-g.x ** 2))
    assert box_length_for(f, 20.0) == pytest.approx(2 * box_length_for(f, 10.0))
