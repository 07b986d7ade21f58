import numpy as np
import pytest

from gdnlslab.errors import DomainError, ResolutionError
from gdnlslab.evolve import SimConfig, run
from gdnlslab.exact import SolitonParams, free_propagate, soliton_field, soliton_grid
from gdnlslab.grid import Field, Grid1D, dealias, derivative, from_spectrum, to_spectrum
from gdnlslab.invariants import (conserved_report, critical_index, energy, hamiltonian, mass,
                                 rescale)
from gdnlslab.norms import lp_norm


def small_gaussian(n=256, length=40.0, eps=0.05):
    g = Grid1D(n, length)
    f = Field(g, 0.0, eps * np.exp(-g.x ** 2))
    return from_spectrum(dealias(to_spectrum(f), 2 / 3))


class TestMass:
    def test_constant(self):
        assert mass(Field(Grid1D(16, 2 * np.pi), 0.0, np.ones(16))) == pytest.approx(2 * np.pi)

    def test_soliton(self):
        p = SolitonParams(1.0, 0.25, 0.0)
        assert abs(mass(soliton_field(p, soliton_grid(p))) - 2 * np.pi) < 1e-8

    def test_free_flow(self, rng):
        g = Grid1D(128, 30.0)
        f = Field(g, 0.0, np.exp(-g.x ** 2) * (1 + 0.3j * rng.normal(size=128)))
        assert mass(free_propagate(f, 2.5)) == pytest.approx(mass(f), rel=1e-12)


class TestEnergy:
    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
    def test_real_gaussian(self, sigma):
        g = Grid1D(512, 30.0)
        f = Field(g, 0.0, np.exp(-g.x ** 2))
        ux = derivative(f, 1).samples
        expected = np.sum(np.abs(ux) ** 2 + np.abs(f.samples) ** (4 * sigma + 2) / (sigma + 1)) * g.dx
        assert energy(f, sigma) == pytest.approx(expected, rel=1e-12)

    def test_zero(self):
        f = Field(Grid1D(32, 5.0), 0.0, np.zeros(32))
        assert energy(f, 1.0) == 0.0
        assert hamiltonian(f, 1.0) == 0.0

    @pytest.mark.parametrize("sigma", [0.0, -1.0])
    def test_bad_sigma(self, sigma):
        f = Field(Grid1D(32, 5.0), 0.0, np.zeros(32))
        with pytest.raises(DomainError):
            energy(f, sigma)
        with pytest.raises(DomainError):
            hamiltonian(f, sigma)

    def test_conserved_sigma_one(self):
        g = Grid1D(1024, 240.0)
        u0 = Field(g, 0.0, 0.5 * np.exp(-0.1 * g.x ** 2) * np.exp(0.5j * g.x))
        u0 = from_spectrum(dealias(to_spectrum(u0), 2 / 3))
        cfg = SimConfig(1.0, g, 5e-3, 10.0, snapshot_times=(5.0,))
        traj = run(u0, cfg)
        assert traj.accepted
        r = traj.reports[-1]
        assert r.relative_mass_drift < 1e-8
        assert r.relative_energy_drift < 1e-6
        assert r.relative_hamiltonian_drift < 1e-6

    @pytest.mark.parametrize("sigma", [1.5, 2.0])
    def test_hamiltonian_conserved(self, sigma):
        g = Grid1D(512, 60.0)
        u0 = Field(g, 0.0, 0.6 * np.exp(-g.x ** 2))
        u0 = from_spectrum(dealias(to_spectrum(u0), 2 / 3))
        traj = run(u0, SimConfig(sigma, g, 2e-3, 4.0))
        assert traj.reports[-1].relative_hamiltonian_drift < 1e-6
        assert traj.reports[-1].relative_mass_drift < 1e-8


class TestRescale:
    def test_identity(self, rng):
        g = Grid1D(64, 10.0)
        f = Field(g, 1.5, rng.normal(size=64) + 0j)
        out = rescale(f, 1.0, 2.0)
        assert np.array_equal(out.samples, f.samples)
        assert out.time == 1.5
        assert out.grid == g

    @pytest.mark.parametrize("sigma", [1.0, 1.5, 3.0])
    @pytest.mark.parametrize("lam", [0.5, 2.0, 3.0])
    def test_mass_law(self, sigma, lam):
        g = Grid1D(512, 40.0)
        f = Field(g, 0.0, np.exp(-g.x ** 2))
        assert mass(rescale(f, lam, sigma)) == pytest.approx(lam ** (1 / sigma - 1) * mass(f), rel=1e-8)

    def test_resample_to_common_grid(self):
        g = Grid1D(512, 40.0)
        f = Field(g, 0.0, np.exp(-g.x ** 2))
        out = rescale(f, 2.0, 1.0, grid=g)
        assert np.abs(out.samples - np.sqrt(2) * np.exp(-4 * g.x ** 2)).max() < 1e-10

    def test_aliasing_refused(self):
        g = Grid1D(64, 10.0)
        f = Field(g, 0.0, np.exp(-4 * g.x ** 2))
        with pytest.raises(ResolutionError):
            rescale(f, 4.0, 1.0, grid=g)

    @pytest.mark.parametrize("lam", [0.0, -1.0])
    def test_bad_lambda(self, lam):
        with pytest.raises(DomainError):
            rescale(Field(Grid1D(16, 1.0), 0.0, np.zeros(16)), lam, 1.0)

    def test_critical_index(self):
        assert critical_index(1.0) == 0.0
        assert critical_index(2.0) == 0.25

    def test_commutes_with_flow(self):
        # evolve then rescale vs rescale then evolve, on the same sample points
        sigma, lam = 1.0, 2.0
        g = Grid1D(512, 60.0)
        u0 = small_gaussian(512, 60.0, 0.5)
        t = 0.4
        cfg = SimConfig(sigma, g, 1e-3, t)
        a = rescale(run(u0, cfg).at(t), lam, sigma)
        b0 = rescale(u0, lam, sigma)
        gb = b0.grid
        cfg_b = SimConfig(sigma, gb, 1e-3 / lam ** 2, t / lam ** 2, dt_safety=1.0)
        b = run(b0, cfg_b).at(t / lam ** 2)
        assert np.abs(a.samples - b.samples).max() < 1e-5


def test_conserved_report_reference():
    g = Grid1D(128, 20.0)
    f = Field(g, 0.0, np.exp(-g.x ** 2))
    ref = conserved_report(f, 1.0)
    assert ref.relative_mass_drift == 0.0
    rep = conserved_report(f.with_samples(1.01 * f.samples), 1.0, ref)
    assert rep.relative_mass_drift == pytest.approx(0.0201, rel=1e-10)
    assert lp_norm(f, 2) ** 2 == pytest.approx(ref.mass)
