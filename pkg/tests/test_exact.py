import numpy as np
import pytest

from gdnlslab.errors import DomainError, GridTooNarrowError
from gdnlslab.evolve import pde_residual
from gdnlslab.exact import (SolitonParams, free_propagate, gaussian_exact, soliton_amplitude,
                            soliton_field, soliton_grid, soliton_mass_formula, soliton_orbit)
from gdnlslab.grid import Field, Grid1D, derivative
from gdnlslab.invariants import mass
from gdnlslab.norms import lp_norm, sobolev_norm

SIGMAS = (1.0, 1.5, 2.0)
OMEGAS = (0.25, 1.0, 4.0)


def family():
    for s in SIGMAS:
        for w in OMEGAS:
            r = np.sqrt(w)
            for c in (0.0, r, -r, -1.9 * r):
                yield SolitonParams(s, w, c)


FAMILY = list(family())
IDS = [f"s{p.sigma}-w{p.omega}-c{p.c:.3g}" for p in FAMILY]


class TestFree:
    def test_zero_time(self, rng):
        g = Grid1D(64, 10.0)
        f = Field(g, 0.0, rng.normal(size=64) + 0j)
        assert np.allclose(free_propagate(f, 0.0).samples, f.samples, atol=1e-15)

    def test_unitary(self, rng):
        g = Grid1D(128, 10.0)
        f = Field(g, 0.0, rng.normal(size=128) + 1j * rng.normal(size=128))
        out = free_propagate(f, 3.7)
        assert abs(lp_norm(out, 2) - lp_norm(f, 2)) < 1e-12 * lp_norm(f, 2)
        assert out.time == pytest.approx(3.7)

    def test_gaussian(self):
        g = Grid1D(1024, 80.0)
        out = free_propagate(Field(g, 0.0, np.exp(-g.x ** 2)), 1.0)
        assert np.abs(out.samples - gaussian_exact(1.0, 1.0, g).samples).max() < 1e-8


class TestGaussian:
    def test_initial(self):
        g = Grid1D(64, 10.0)
        assert np.allclose(gaussian_exact(2.0, 0.0, g).samples, np.exp(-2 * g.x ** 2))

    def test_sup(self):
        g = Grid1D(1024, 40.0)
        f = gaussian_exact(1.0, 1.0, g)
        assert lp_norm(f, np.inf) == pytest.approx(17 ** -0.25, abs=1e-12)
        assert 17 ** -0.25 == pytest.approx(0.49247, abs=1e-5)

    def test_mass_constant(self):
        g = Grid1D(2048, 200.0)
        ms = [mass(gaussian_exact(0.5, t, g)) for t in (0.0, 1.0, 3.0)]
        assert np.ptp(ms) < 1e-10

    def test_bad_width(self):
        with pytest.raises(DomainError):
            gaussian_exact(0.0, 1.0, Grid1D(16, 1.0))


class TestParams:
    @pytest.mark.parametrize("kw", [dict(sigma=0.0, omega=1, c=0), dict(sigma=1, omega=0, c=0),
                                    dict(sigma=1, omega=1, c=2.0), dict(sigma=1, omega=1, c=0, gauge="x")])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            SolitonParams(**kw)


class TestAmplitude:
    def test_value(self):
        assert soliton_amplitude(SolitonParams(1.0, 0.25, 0.0), 0.0) == pytest.approx(np.sqrt(2))

    @pytest.mark.parametrize("p", FAMILY[::3])
    def test_even_and_decreasing(self, p):
        x = np.linspace(0, 30, 301)
        a = soliton_amplitude(p, x)
        assert np.allclose(a, soliton_amplitude(p, -x), rtol=1e-14)
        assert np.all(np.diff(a) <= 0)

    def test_far_field_finite(self):
        assert soliton_amplitude(SolitonParams(1.0, 1.0, 0.0), 1e4) == 0.0


class TestSolitonField:
    def test_modulus(self):
        p = SolitonParams(1.5, 1.0, 0.5)
        g = soliton_grid(p)
        assert np.abs(np.abs(soliton_field(p, g).samples) - soliton_amplitude(p, g.x)).max() < 1e-12

    def test_mass(self):
        p = SolitonParams(1.0, 0.25, 0.0)
        assert abs(mass(soliton_field(p, soliton_grid(p))) - 2 * np.pi) < 1e-8

    def test_narrow_box(self):
        with pytest.raises(GridTooNarrowError):
            soliton_field(SolitonParams(1.0, 0.25, 0.0), Grid1D(64, 10.0))

    @pytest.mark.parametrize("p", FAMILY, ids=IDS)
    def test_mass_formula(self, p):
        m = mass(soliton_field(p, soliton_grid(p)))
        assert m == pytest.approx(soliton_mass_formula(p), rel=1e-7)

    @pytest.mark.parametrize("p", FAMILY, ids=IDS)
    def test_virial(self, p):
        p = SolitonParams(p.sigma, p.omega, p.c, gauge="nondivergence")
        f = soliton_field(p, soliton_grid(p))
        lhs = lp_norm(derivative(f, 1), 2) ** 2
        assert lhs == pytest.approx(p.omega * mass(f), rel=1e-6)

    def test_flow_gauge_has_larger_gradient(self):
        p = SolitonParams(1.0, 0.25, 0.0)
        f = soliton_field(p, soliton_grid(p))
        assert lp_norm(derivative(f, 1), 2) ** 2 == pytest.approx(2.5 * np.pi, rel=1e-6)

    def test_virial_value(self):
        p = SolitonParams(1.0, 0.25, 0.0, gauge="nondivergence")
        f = soliton_field(p, soliton_grid(p))
        assert lp_norm(derivative(f, 1), 2) ** 2 == pytest.approx(np.pi / 2, rel=1e-6)

    @pytest.mark.parametrize("p", FAMILY, ids=IDS)
    def test_heisenberg(self, p):
        f = soliton_field(p, soliton_grid(p))
        g = f.grid
        lhs = mass(f) ** 2
        rhs = 4 * mass(f.with_samples(g.x * f.samples)) * lp_norm(derivative(f, 1), 2) ** 2
        assert lhs <= rhs

    @pytest.mark.parametrize("sigma", [1.0, 1.5])
    def test_small_mass_limit(self, sigma):
        w = 1.0
        h1 = []
        for k in range(1, 11):
            p = SolitonParams(sigma, w, -2 * np.sqrt(w) * (1 - 2.0 ** -k))
            h1.append(sobolev_norm(soliton_field(p, soliton_grid(p)), 1.0))
        assert np.all(np.diff(h1) < 0)


class TestOrbit:
    def test_initial(self):
        p = SolitonParams(1.0, 1.0, 0.5)
        g = soliton_grid(p)
        assert np.allclose(soliton_orbit(p, 0.0, g).samples, soliton_field(p, g).samples)

    def test_mass_constant(self):
        p = SolitonParams(1.5, 1.0, 1.0)
        g = soliton_grid(p, extra=5.0)
        assert mass(soliton_orbit(p, 3.0, g)) == pytest.approx(mass(soliton_orbit(p, 0.0, g)), rel=1e-12)

    @pytest.mark.parametrize("p", [SolitonParams(1.0, 0.25, 0.0), SolitonParams(1.5, 1.0, 0.5),
                                   SolitonParams(2.0, 1.0, -1.0)])
    def test_residual(self, p):
        g = soliton_grid(p, extra=2.0)
        a, b = soliton_orbit(p, 1.0, g), soliton_orbit(p, 1.0 + 1e-4, g)
        assert pde_residual(a, b, p.sigma) < 1e-5

    def test_nondivergence_gauge_is_not_a_solution(self):
        p = SolitonParams(1.0, 1.0, 0.5, gauge="nondivergence")
        g = soliton_grid(p)
        a, b = soliton_orbit(p, 0.0, g), soliton_orbit(p, 1e-4, g)
        assert pde_residual(a, b, p.sigma) > 1e-2
