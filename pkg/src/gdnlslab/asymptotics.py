"""Asymptotic ODE, scattering profile ``W`` and decay-rate fits.

Along each ray ``x = v t`` the profile obeys, up to an integrable remainder,
``i gamma_t = (v/2) t^(-sigma) |gamma|^(2 sigma) gamma``.  Its solutions keep
``|gamma|`` fixed and rotate the phase by ``(v/2)|W|^(2 sigma) tau(t)`` with
``tau = log t`` for ``sigma = 1`` and ``tau = t^(1-sigma)/(1-sigma)`` above.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (CoverageError, DomainError, InsufficientDataError,
                     UnsupportedRegimeError)
from .evolve import Trajectory
from .grid import Field, derivative, to_spectrum
from .norms import lp_norm
from .packets import FOURIER_PAIRING, PacketProfile
from .vector_field import japanese

__all__ = [
    "ScatteringProfile",
    "DecayFit",
    "phase_clock",
    "ode_solution",
    "ode_rhs",
    "extract_W",
    "extrapolate_W",
    "profile_from_W",
    "manufacture_field",
    "manufacture_spectrum",
    "scattering_errors",
    "fit_decay",
    "dispersive_constant",
    "dispersive_bound_constants",
    "w_sobolev_energies",
    "sup_difference",
]


@dataclass(frozen=True, eq=False)
class ScatteringProfile:
    velocities: np.ndarray
    W: np.ndarray
    sigma: float
    extracted_at: float

    def __post_init__(self):
        v = np.asarray(self.velocities, dtype=float)
        w = np.asarray(self.W, dtype=complex)
        if v.ndim != 1 or v.shape != w.shape:
            raise DomainError("velocities and W must have matching lengths")
        if not self.extracted_at > 1:
            raise DomainError(f"extraction time must exceed 1, got {self.extracted_at}")
        v.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "velocities", v)
        object.__setattr__(self, "W", w)

    def __call__(self, v):
        """``W`` at arbitrary velocities: cubic spline inside the grid, zero outside."""
        v = np.asarray(v, dtype=float)
        out = np.zeros(v.shape, dtype=complex)
        inside = (v >= self.velocities[0]) & (v <= self.velocities[-1])
        if np.any(inside):
            out[inside] = CubicSpline(self.velocities, self.W)(v[inside])
        return out


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    amplitude: float
    r_squared: float
    window: tuple

    def __post_init__(self):
        if self.window[0] < 1:
            raise DomainError("fit windows start at t >= 1")
        if not np.isfinite(self.r_squared):
            raise DomainError("non-finite r^2")


def _check_regime(sigma):
    if sigma < 1:
        raise UnsupportedRegimeError(
            f"sigma={sigma} < 1: the profile equation gives no usable asymptotics there")


def phase_clock(t, sigma: float):
    """``tau(t)``: ``log t`` at ``sigma = 1``, ``t^(1-sigma)/(1-sigma)`` for ``sigma > 1``."""
    _check_regime(sigma)
    t = np.asarray(t, dtype=float)
    if sigma == 1:
        if np.any(t <= 1):
            raise DomainError("the logarithmic branch needs t > 1")
        return np.log(t)
    if np.any(t <= 0):
        raise DomainError("need t > 0")
    return t ** (1 - sigma) / (1 - sigma)


def ode_solution(W, v, t, sigma: float):
    """``W exp(-i (v/2) |W|^(2 sigma) tau(t))``."""
    W = np.asarray(W, dtype=complex)
    v = np.asarray(v, dtype=float)
    out = W * np.exp(-0.5j * v * np.abs(W) ** (2 * sigma) * phase_clock(t, sigma))
    return complex(out) if out.ndim == 0 else out


def ode_rhs(gamma, v, t, sigma: float):
    """``-i (v/2) t^(-sigma) |gamma|^(2 sigma) gamma``, the value of ``gamma_t``."""
    gamma = np.asarray(gamma, dtype=complex)
    return -0.5j * np.asarray(v) * t ** (-sigma) * np.abs(gamma) ** (2 * sigma) * gamma


def extract_W(p: PacketProfile, sigma: float) -> ScatteringProfile:
    """Undo the ODE phase: ``W = gamma exp(+i (v/2)|gamma|^(2 sigma) tau(t))``."""
    _check_regime(sigma)
    if not p.time > 1:
        raise DomainError(f"extraction needs t > 1, got {p.time}")
    v, g = p.velocities, p.gamma
    W = g * np.exp(0.5j * v * np.abs(g) ** (2 * sigma) * phase_clock(p.time, sigma))
    return ScatteringProfile(v, W, float(sigma), float(p.time))


def extrapolate_W(early: ScatteringProfile, late: ScatteringProfile) -> ScatteringProfile:
    """Richardson estimate of ``lim W(T)`` assuming ``W(T) = W + c/T + o(1/T)``.

    A single extraction carries an ``O(1/T)`` bias from the packet's
    smoothing in frequency; combining two times removes the leading term.
    """
    if early.sigma != late.sigma:
        raise DomainError("profiles were extracted with different sigma")
    if not early.extracted_at < late.extracted_at:
        raise DomainError("need early.extracted_at < late.extracted_at")
    if early.velocities.shape != late.velocities.shape or np.any(
            early.velocities != late.velocities):
        raise DomainError("profiles use different velocity grids")
    r = late.extracted_at / early.extracted_at
    W = (r * late.W - early.W) / (r - 1.0)
    return ScatteringProfile(late.velocities, W, late.sigma, late.extracted_at)


def profile_from_W(prof: ScatteringProfile, t: float) -> PacketProfile:
    """The ODE profile at time ``t`` started from ``prof``."""
    v = prof.velocities
    return PacketProfile(t, v, ode_solution(prof.W, v, t, prof.sigma))


def _physical_expansion(prof, t, x):
    v = x / t
    return t ** -0.5 * np.exp(0.25j * x * x / t) * ode_solution(prof(v), v, t, prof.sigma)


def _fourier_expansion(prof, t, xi):
    v = 2.0 * xi
    return FOURIER_PAIRING * np.exp(-1j * t * xi * xi) * ode_solution(prof(v), v, t, prof.sigma)


def manufacture_field(prof: ScatteringProfile, t: float, grid) -> Field:
    """Field equal to the physical-space expansion at time ``t``."""
    return Field(grid, t, _physical_expansion(prof, t, grid.x))


def manufacture_spectrum(prof: ScatteringProfile, t: float, grid) -> Field:
    """Field whose continuous transform equals the Fourier-side expansion at the grid frequencies."""
    uh = _fourier_expansion(prof, t, np.array(grid.xi))
    return Field(grid, t, np.fft.ifft(uh / grid.shift_phase))


def _effective_range(values, coords, tol):
    """Smallest ``[lo, hi]`` holding all but ``tol`` of ``sum |values|^2``."""
    w = np.abs(values) ** 2
    total = w.sum()
    if total == 0:
        return None
    order = np.argsort(coords)
    c = np.cumsum(w[order]) / total
    lo = coords[order][np.searchsorted(c, 0.5 * tol)]
    hi = coords[order][min(np.searchsorted(c, 1 - 0.5 * tol), len(c) - 1)]
    return lo, hi


def scattering_errors(f: Field, prof: ScatteringProfile, coverage_tol: float = 1e-8) -> dict:
    """Gap between ``u`` and the modified-scattering expansion built from ``W``.

    ``err_x = u - t^(-1/2) e^{i x^2/4t} W(x/t) e^{-i (x/2t)|W(x/t)|^(2s) t tau(t)}``
    and ``err_xi = u_hat - FOURIER_PAIRING e^{-i t xi^2} (ODE profile at v = 2 xi)``.
    A CoverageError is raised when the velocity grid of ``W`` misses part of the
    range ``x/t`` (or ``2 xi``) carrying more than ``coverage_tol`` of the mass.
    """
    t = f.time
    if not t > 1:
        raise DomainError(f"scattering errors need t > 1, got {t}")
    g = f.grid
    vmin, vmax = prof.velocities[0], prof.velocities[-1]
    x = g.x
    xi = np.array(g.xi)
    uh = to_spectrum(f).coefficients
    for values, vel, label in ((f.samples, x / t, "x/t"), (uh, 2 * xi, "2 xi")):
        rng = _effective_range(values, vel, coverage_tol)
        if rng is not None and (rng[0] < vmin or rng[1] > vmax):
            raise CoverageError(
                f"{label} range [{rng[0]:.3g}, {rng[1]:.3g}] exceeds W's velocities "
                f"[{vmin:.3g}, {vmax:.3g}]")
    ex = f.samples - _physical_expansion(prof, t, x)
    exi = uh - _fourier_expansion(prof, t, xi)
    dxi = 2 * np.pi / g.length
    return {
        "time": float(t),
        "err_x_inf": float(np.abs(ex).max()),
        "err_x_l2": float(np.sqrt(np.sum(np.abs(ex) ** 2) * g.dx)),
        "err_xi_inf": float(np.abs(exi).max()),
        "err_xi_l2": float(np.sqrt(np.sum(np.abs(exi) ** 2) * dxi)),
    }


def fit_decay(times, values, window: tuple | None = None, min_points: int = 8) -> DecayFit:
    """Least squares of ``log value`` on ``log t`` over ``window`` (default ``[t_max/16, t_max]``)."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape:
        raise DomainError("times and values must have matching lengths")
    if window is None:
        window = (max(1.0, t.max() / 16), float(t.max()))
    lo, hi = window
    if lo < 1:
        raise DomainError("fit windows start at t >= 1")
    keep = (t >= lo) & (t <= hi)
    t, y = t[keep], y[keep]
    if t.size < min_points:
        raise InsufficientDataError(f"need >= {min_points} points in {window}, got {t.size}")
    if np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise DomainError("decay fits need positive finite values")
    lx, ly = np.log(t), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 if ss_tot == 0 else float(min(1.0, max(0.0, 1 - np.sum(resid ** 2) / ss_tot)))
    return DecayFit(float(slope), float(np.exp(intercept)), r2, (float(lo), float(hi)))


def dispersive_constant(traj: Trajectory) -> float:
    """``sup_{t >= 1} t^(1/2) ||u(t)||_inf / ||u_0||_1``."""
    if traj.times[-1] < 16:
        raise DomainError("dispersive_constant needs a trajectory reaching t >= 16")
    l1 = lp_norm(traj.snapshots.fields[0], 1)
    if l1 == 0:
        return 0.0
    best = 0.0
    for t, f in zip(traj.times, traj.snapshots.fields):
        if t >= 1:
            best = max(best, np.sqrt(t) * lp_norm(f, np.inf) / l1)
    return float(best)


def dispersive_bound_constants(traj: Trajectory, eps: float) -> dict:
    """Smallest ``K`` with ``<t>^(1/2)||u||_inf <= K eps`` and ``<t>^(1/2)||u_x||_inf <= K sqrt(eps)``."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    ku = kux = 0.0
    for t, f in zip(traj.times, traj.snapshots.fields):
        w = np.sqrt(japanese(t))
        ku = max(ku, w * lp_norm(f, np.inf) / eps)
        kux = max(kux, w * lp_norm(derivative(f, 1), np.inf) / np.sqrt(eps))
    return {"K_u": float(ku), "K_ux": float(kux), "K": float(max(ku, kux))}


def w_sobolev_energies(prof: ScatteringProfile, s_values=(0.5, 0.8, 0.95)) -> dict:
    """``int (1 + k^2)^s |W_hat(k)|^2 dk`` of the sampled ``W`` on its uniform velocity grid."""
    v = prof.velocities
    if len(v) < 4:
        raise InsufficientDataError("need at least 4 velocities")
    dv = np.diff(v)
    if not np.allclose(dv, dv[0], rtol=1e-9):
        raise DomainError("H^s energies need a uniform velocity grid")
    h = dv[0]
    n = len(v)
    k = 2 * np.pi * np.fft.fftfreq(n, d=h)
    wh = np.fft.fft(prof.W) * h
    dk = 2 * np.pi / (n * h)
    return {float(s): float(np.sum((1 + k * k) ** s * np.abs(wh) ** 2) * dk / (2 * np.pi))
            for s in s_values}


def sup_difference(a: ScatteringProfile, b: ScatteringProfile) -> float:
    if a.velocities.shape != b.velocities.shape or np.any(a.velocities != b.velocities):
        raise DomainError("profiles use different velocity grids")
    return float(np.abs(a.W - b.W).max(initial=0.0))
