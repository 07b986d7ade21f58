"""Uniform periodic grid, Fourier transform pair and spectral multipliers.

Convention: ``F f(xi) = int f(x) exp(-i x xi) dx`` with ``1/(2 pi)`` on the
inverse.  On the grid ``x_j = origin + j*dx`` the forward transform is the
rectangle rule

    f_hat[k] = dx * exp(-i xi_k origin) * sum_j f_j exp(-2 pi i j k / n)

which is exact for band-limited periodic data.  Coefficients are stored in
numpy FFT order (``0, 1, ..., n/2-1, -n/2, ..., -1``); ``Spectrum.centered``
returns the symmetric ``-n/2 .. n/2-1`` ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError, InvalidDataError, ResolutionError

__all__ = [
    "Grid1D",
    "Field",
    "Spectrum",
    "to_spectrum",
    "from_spectrum",
    "derivative",
    "fractional_derivative",
    "dealias",
    "dealias_mask",
    "interpolate",
    "resample",
]


@dataclass(frozen=True)
class Grid1D:
    n: int
    length: float
    origin: float | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise DomainError(f"n must be an even integer >= 8, got {self.n!r}")
        if not (np.isfinite(self.length) and self.length > 0):
            raise DomainError(f"length must be positive, got {self.length!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))
        if self.origin is None:
            object.__setattr__(self, "origin", -0.5 * self.length)
        object.__setattr__(self, "origin", float(self.origin))

    @property
    def dx(self) -> float:
        return self.length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        x = self.origin + self.dx * np.arange(self.n)
        x.setflags(write=False)
        return x

    @cached_property
    def xi(self) -> np.ndarray:
        """Angular wavenumbers ``2 pi k / L`` in FFT order."""
        xi = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)
        xi.setflags(write=False)
        return xi

    @cached_property
    def k(self) -> np.ndarray:
        """Integer mode indices in FFT order."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n).round().astype(int)
        k.setflags(write=False)
        return k

    @property
    def nyquist_index(self) -> int:
        return self.n // 2

    @cached_property
    def shift_phase(self) -> np.ndarray:
        # exp(-i xi origin), maps raw FFT output to the continuous convention
        ph = self.dx * np.exp(-1j * self.xi * self.origin)
        ph.setflags(write=False)
        return ph

    def scaled(self, factor: float) -> "Grid1D":
        """Grid with every coordinate multiplied by ``factor``."""
        return Grid1D(self.n, self.length * factor, self.origin * factor)


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of ``u(t, .)`` on a grid."""

    grid: Grid1D
    time: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = _frozen(self.samples)
        if s.shape != (self.grid.n,):
            raise InvalidDataError(
                f"samples have shape {s.shape}, expected ({self.grid.n},)")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "time", float(self.time))

    @property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.samples)))

    def check_finite(self):
        if not self.is_finite:
            raise InvalidDataError(f"non-finite samples at t={self.time}")
        return self

    def with_samples(self, samples, time=None) -> "Field":
        return Field(self.grid, self.time if time is None else time, samples)

    def __mul__(self, c):
        return self.with_samples(self.samples * c)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier coefficients ``u_hat(xi_k)`` in FFT order."""

    grid: Grid1D
    time: float
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = _frozen(self.coefficients)
        if c.shape != (self.grid.n,):
            raise InvalidDataError(
                f"coefficients have shape {c.shape}, expected ({self.grid.n},)")
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "time", float(self.time))

    def centered(self):
        """Return ``(xi, coefficients)`` ordered from ``-n/2`` to ``n/2-1``."""
        return (np.fft.fftshift(self.grid.xi),
                np.fft.fftshift(self.coefficients))

    def energy(self) -> float:
        """``(1/2 pi) sum |u_hat|^2 dxi``, equal to the L2 mass by Parseval."""
        return float(np.sum(np.abs(self.coefficients) ** 2) / self.grid.length)


def to_spectrum(f: Field) -> Spectrum:
    if not f.is_finite:
        raise InvalidDataError(f"cannot transform non-finite field at t={f.time}")
    return Spectrum(f.grid, f.time, np.fft.fft(f.samples) * f.grid.shift_phase)


def from_spectrum(s: Spectrum) -> Field:
    if not np.all(np.isfinite(s.coefficients)):
        raise InvalidDataError(f"cannot invert non-finite spectrum at t={s.time}")
    return Field(s.grid, s.time, np.fft.ifft(s.coefficients / s.grid.shift_phase))


def _apply_multiplier(f: Field, symbol) -> Field:
    if not f.is_finite:
        raise InvalidDataError(f"non-finite samples at t={f.time}")
    return f.with_samples(np.fft.ifft(np.fft.fft(f.samples) * symbol))


def _zero_nyquist(symbol, grid):
    symbol = np.array(symbol, dtype=complex)
    symbol[grid.nyquist_index] = 0.0
    return symbol


def derivative(f: Field, order: int = 1) -> Field:
    """Spectral derivative ``d^order/dx^order``; the Nyquist mode is dropped."""
    if int(order) != order or order < 1:
        raise DomainError(f"derivative order must be a positive integer, got {order!r}")
    g = f.grid
    return _apply_multiplier(f, _zero_nyquist((1j * g.xi) ** int(order), g))


def fractional_derivative(f: Field, s: float, kind: str = "homogeneous") -> Field:
    """Apply ``D^s`` (symbol ``|xi|^s``) or ``J^s`` (symbol ``(1+xi^2)^(s/2)``)."""
    if s < 0:
        raise DomainError(f"fractional order must be >= 0, got {s!r}")
    if s == 0:
        return f.with_samples(f.samples)
    g = f.grid
    if kind == "homogeneous":
        symbol = np.abs(g.xi) ** s
    elif kind == "inhomogeneous":
        symbol = (1.0 + g.xi ** 2) ** (0.5 * s)
    else:
        raise DomainError(f"kind must be 'homogeneous' or 'inhomogeneous', got {kind!r}")
    return _apply_multiplier(f, _zero_nyquist(symbol, g))


def dealias_mask(grid: Grid1D, keep_fraction: float) -> np.ndarray:
    if not 0.0 < keep_fraction <= 1.0:
        raise DomainError(f"keep_fraction must lie in (0, 1], got {keep_fraction!r}")
    return np.abs(grid.k) <= keep_fraction * grid.n / 2


def dealias(s: Spectrum, keep_fraction: float = 2.0 / 3.0) -> Spectrum:
    mask = dealias_mask(s.grid, keep_fraction)
    return Spectrum(s.grid, s.time, np.where(mask, s.coefficients, 0.0))


def interpolate(f: Field, points) -> np.ndarray:
    """Band-limited (trigonometric) interpolation of ``f`` at arbitrary points.

    The Nyquist coefficient is split evenly between ``+-n/2`` so that real
    data interpolates to real values.
    """
    g = f.grid
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    c = np.fft.fft(f.samples) / g.n
    xi = np.array(g.xi)
    nyq = g.nyquist_index
    # cos-split of the unmatched mode
    c_extra = np.array([0.5 * c[nyq]])
    c = c.copy()
    c[nyq] *= 0.5
    xi_all = np.concatenate([xi, [-xi[nyq]]])
    c_all = np.concatenate([c, c_extra])
    out = np.empty(pts.shape, dtype=complex)
    rel = pts - g.origin
    chunk = max(1, 2 ** 22 // g.n)
    for i in range(0, pts.size, chunk):
        ph = np.exp(1j * np.outer(rel[i:i + chunk], xi_all))
        out[i:i + chunk] = ph @ c_all
    return out if np.ndim(points) else out[0]


def resample(f: Field, target: Grid1D, tol: float = 1e-12) -> Field:
    """Evaluate the band-limited interpolant of ``f`` on ``target``.

    Raises ResolutionError when ``f`` carries spectral energy (relative
    ``tol``) above the target grid's Nyquist wavenumber.  Target points
    outside the source box are set to zero rather than to a periodic image,
    since fields here stand for functions on the line.
    """
    g = f.grid
    kmax_target = np.pi / target.dx
    power = np.abs(np.fft.fft(f.samples)) ** 2
    total = power.sum()
    lost = power[np.abs(g.xi) > kmax_target].sum()
    if total > 0 and lost > tol * total:
        raise ResolutionError(
            f"target grid (dx={target.dx:.3g}) cannot represent "
            f"{lost / total:.2e} of the spectral energy")
    x = target.x
    inside = (x >= g.origin - 1e-12 * g.length) & (x < g.origin + g.length * (1 - 1e-12))
    out = np.zeros(target.n, dtype=complex)
    out[inside] = interpolate(f, x[inside])
    return Field(target, f.time, out)
