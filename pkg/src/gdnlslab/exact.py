"""Closed-form reference solutions: free propagator, Gaussians, solitary waves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, GridTooNarrowError
from .grid import Field, Grid1D

__all__ = [
    "SolitonParams",
    "free_propagate",
    "gaussian_exact",
    "soliton_amplitude",
    "soliton_field",
    "soliton_orbit",
    "soliton_mass_formula",
    "soliton_grid",
    "PHASE_GAUGES",
]

# Coefficient kappa of the phase term -kappa * int_{-inf}^x amp^(2 sigma).
#   "flow": (2 sigma + 1)/(2 sigma + 2); exact travelling wave of
#       i u_t + u_xx + i (|u|^(2 sigma) u)_x = 0, the equation evolved here.
#   "nondivergence": 1/(2 sigma + 2); travelling wave of
#       i u_t + u_xx + i |u|^(2 sigma) u_x = 0.  Both share the same
#       amplitude and mass; only |phi_x| differs.
PHASE_GAUGES = {
    "flow": lambda s: (2 * s + 1) / (2 * s + 2),
    "nondivergence": lambda s: 1.0 / (2 * s + 2),
}


@dataclass(frozen=True)
class SolitonParams:
    sigma: float
    omega: float
    c: float
    gauge: str = "flow"

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma!r}")
        if not self.omega > 0:
            raise DomainError(f"omega must be positive, got {self.omega!r}")
        if not self.c ** 2 < 4 * self.omega:
            raise DomainError(
                f"need c^2 < 4 omega, got c={self.c!r}, omega={self.omega!r}")
        if self.gauge not in PHASE_GAUGES:
            raise DomainError(f"unknown gauge {self.gauge!r}")

    @property
    def rate(self) -> float:
        """``sigma * sqrt(4 omega - c^2)``, the cosh argument scale."""
        return self.sigma * np.sqrt(4 * self.omega - self.c ** 2)

    @property
    def phase_coefficient(self) -> float:
        return PHASE_GAUGES[self.gauge](self.sigma)

    def amp_power(self, x):
        """``amp^(2 sigma)`` evaluated without the fractional root."""
        s, w, c = self.sigma, self.omega, self.c
        # 2 sqrt(w) cosh(r x) - c, written to avoid overflow for large |x|
        ax = np.abs(self.rate * np.asarray(x, dtype=float))
        e = np.exp(-ax)
        denom_scaled = np.sqrt(w) * (1.0 + e * e) - c * e  # = denom * e
        return (s + 1) * (4 * w - c ** 2) * e / denom_scaled


def free_propagate(f: Field, dt: float) -> Field:
    """Exact linear Schrodinger flow ``exp(i dt d_xx)``: multiplier ``exp(-i xi^2 dt)``."""
    g = f.grid
    coeff = np.fft.fft(f.samples) * np.exp(-1j * g.xi ** 2 * dt)
    return Field(g, f.time + dt, np.fft.ifft(coeff))


def gaussian_exact(a: float, t: float, grid: Grid1D) -> Field:
    """Free evolution of ``exp(-a x^2)`` at time ``t``."""
    if not a > 0:
        raise DomainError(f"Gaussian width parameter must be positive, got {a!r}")
    z = 1.0 + 4j * a * t
    return Field(grid, t, np.exp(-a * grid.x ** 2 / z) / np.sqrt(z))


def soliton_amplitude(p: SolitonParams, x):
    return p.amp_power(x) ** (1.0 / (2 * p.sigma))


def _check_edges(p, xs, label):
    peak = soliton_amplitude(p, 0.0)
    edge = max(soliton_amplitude(p, xs[0]), soliton_amplitude(p, xs[-1]))
    if edge >= 1e-12 * peak:
        raise GridTooNarrowError(
            f"{label}: edge amplitude {edge:.3e} exceeds 1e-12 * peak; widen the box")


def _cumulative_integral(values, grid):
    """Spectrally accurate ``int_{x_0}^{x} g`` for data decaying at both edges."""
    n, dx = grid.n, grid.dx
    ghat = np.fft.fft(values)
    mean = ghat[0].real / n
    xi = grid.xi
    anti = np.zeros_like(ghat)
    nz = xi != 0
    anti[nz] = ghat[nz] / (1j * xi[nz])
    anti[grid.nyquist_index] = 0.0
    periodic = np.fft.ifft(anti).real
    return mean * (grid.x - grid.x[0]) + periodic - periodic[0]


def _profile(p: SolitonParams, y, grid):
    """Complex profile ``phi(y)`` sampled at ``y = x - shift`` on ``grid``."""
    power = p.amp_power(y)
    amp = power ** (1.0 / (2 * p.sigma))
    # left tail beyond the box: power ~ K exp(-rate |y|) / sqrt(omega)
    k = (p.sigma + 1) * (4 * p.omega - p.c ** 2)
    tail = k * np.exp(-p.rate * abs(y[0])) / (np.sqrt(p.omega) * p.rate)
    integral = tail + _cumulative_integral(power, grid)
    phase = 0.5 * p.c * y - p.phase_coefficient * integral
    return amp * np.exp(1j * phase)


def soliton_field(p: SolitonParams, grid: Grid1D) -> Field:
    _check_edges(p, grid.x, "soliton_field")
    return Field(grid, 0.0, _profile(p, grid.x, grid))


def soliton_orbit(p: SolitonParams, t: float, grid: Grid1D) -> Field:
    """``exp(i omega t) phi(x - c t)``."""
    y = grid.x - p.c * t
    _check_edges(p, y, "soliton_orbit")
    return Field(grid, t, np.exp(1j * p.omega * t) * _profile(p, y, grid))


def soliton_mass_formula(p: SolitonParams) -> float:
    """Closed-form mass with the half-line integral done by adaptive quadrature."""
    s, w, c = p.sigma, p.omega, p.c
    shift = c / (2 * np.sqrt(w))

    def integrand(x):
        return (np.cosh(x) - shift) ** (-1.0 / s)

    # integrand ~ 2^(1/s) exp(-x/s); cut where it drops below 1e-16
    upper = s * (np.log(2.0) / s + 16 * np.log(10.0)) + 1.0
    val, _ = integrate.quad(integrand, 0.0, upper, epsabs=1e-10, epsrel=1e-13,
                            limit=200)
    return float((2 / s) * ((s + 1) / (2 * np.sqrt(w))) ** (1 / s)
                 * (4 * w - c ** 2) ** (1 / s - 0.5) * val)


def soliton_grid(p: SolitonParams, n: int | None = None, margin: float = 1.15,
                 extra: float = 0.0) -> Grid1D:
    """Box wide enough for the edge test and fine enough for spectral accuracy.

    ``extra`` widens the box symmetrically, e.g. by ``|c| t`` for an orbit.
    """
    # amp ~ exp(-rate |x| / (2 sigma)); need amp(edge) < 1e-13 * peak
    peak = soliton_amplitude(p, 0.0)
    decay = p.rate / (2 * p.sigma)
    half = (np.log(1e13) + max(0.0, np.log(2 * peak))) / decay
    length = 2 * margin * half + 2 * extra
    if n is None:
        # distance of the nearest complex singularity of the profile
        ratio = p.c / (2 * np.sqrt(p.omega))
        strip = np.arccos(np.clip(ratio, -1, 1)) / p.rate
        kmax = 40.0 / strip
        n = int(2 ** np.ceil(np.log2(max(64, length * kmax / np.pi))))
    return Grid1D(n, length)
