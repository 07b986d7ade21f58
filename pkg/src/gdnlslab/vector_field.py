"""The Galilean vector field ``L = x + 2 i t d_x`` and diagnostics built on it.

``x`` is the box coordinate measured from ``center`` (the initial data's
center of mass in experiments).  Multiplying by ``x`` on a periodic box is
only meaningful while the solution keeps negligible mass near the edges, so
every entry point checks the edge zone first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientDataError, TruncationError
from .evolve import Trajectory, edge_mass_fraction
from .grid import Field, derivative
from .norms import lp_norm, sobolev_norm

__all__ = [
    "VectorFieldReport",
    "GrowthFit",
    "center_of_mass",
    "apply_L",
    "vector_field_report",
    "nonlinear_L_identity_gap",
    "ks_gap",
    "lu_energy_terms",
    "lu_energy_rhs",
    "japanese",
    "fit_growth",
    "lu_growth_fit",
    "lu_equation_residual",
]


@dataclass(frozen=True)
class VectorFieldReport:
    time: float
    lu_l2: float
    lux_l2: float
    lu_h1: float
    ks_ratio: float


@dataclass(frozen=True)
class GrowthFit:
    """``value ~ constant * <t>^exponent`` fitted over ``window``."""
    exponent: float
    constant: float
    r_squared: float
    window: tuple


def japanese(t):
    """``<t> = (1 + t^2)^(1/2)``."""
    return np.sqrt(1.0 + np.asarray(t, dtype=float) ** 2)


def center_of_mass(f: Field) -> float:
    rho = np.abs(f.samples) ** 2
    total = rho.sum()
    if total == 0:
        return 0.0
    return float(np.sum(f.grid.x * rho) / total)


def _guard(f, guard_fraction, tail_tol):
    frac = edge_mass_fraction(f, guard_fraction)
    if frac > tail_tol:
        raise TruncationError(
            f"edge mass fraction {frac:.3e} exceeds {tail_tol:.1e} at t={f.time}; "
            "x-multiplication is not meaningful on this box")


def _apply(f, center):
    ux = derivative(f, 1).samples
    return f.with_samples((f.grid.x - center) * f.samples + 2j * f.time * ux)


def apply_L(f: Field, center: float = 0.0, guard_fraction: float = 0.1,
            tail_tol: float = 1e-8) -> Field:
    """``(x - center) u + 2 i t u_x`` at the field's own time stamp."""
    _guard(f, guard_fraction, tail_tol)
    return _apply(f, center)


def vector_field_report(f: Field, center: float = 0.0, guard_fraction: float = 0.1,
                        tail_tol: float = 1e-8) -> VectorFieldReport:
    lu = apply_L(f, center, guard_fraction, tail_tol)
    lux = _apply(derivative(f, 1), center)
    ks = ks_gap(f, center, guard_fraction, tail_tol) if f.time > 0 else 0.0
    return VectorFieldReport(float(f.time), lp_norm(lu, 2), lp_norm(lux, 2),
                             sobolev_norm(lu, 1.0), ks)


def _powers(u, sigma):
    """``|u|^(2 sigma)`` and ``|u|^(2 sigma - 2) u^2`` (zero where ``u`` vanishes)."""
    rho = u.real ** 2 + u.imag ** 2
    p = rho ** sigma
    q = np.zeros_like(u)
    nz = rho > 0
    q[nz] = rho[nz] ** (sigma - 1) * u[nz] ** 2
    return p, q


def _check_sigma(sigma):
    if not sigma >= 0.5:
        raise DomainError(f"need sigma >= 1/2, got {sigma!r}")


def nonlinear_L_identity_gap(f: Field, sigma: float, center: float = 0.0,
                             guard_fraction: float = 0.1, tail_tol: float = 1e-8) -> float:
    """L2 norm of ``L(|u|^(2s) u) - (s+1)|u|^(2s) Lu + s |u|^(2s-2) u^2 conj(Lu)``."""
    _check_sigma(sigma)
    _guard(f, guard_fraction, tail_tol)
    u = f.samples
    p, q = _powers(u, sigma)
    lhs = _apply(f.with_samples(p * u), center).samples
    lu = _apply(f, center).samples
    rhs = (sigma + 1) * p * lu - sigma * q * np.conj(lu)
    return lp_norm(f.with_samples(lhs - rhs), 2)


def ks_gap(f: Field, center: float = 0.0, guard_fraction: float = 0.1,
           tail_tol: float = 1e-8) -> float:
    """``t ||u||_inf^2 / (||u||_2 ||Lu||_2)``; at most 1 for localized data."""
    if not f.time > 0:
        raise DomainError(f"ks_gap needs t > 0, got t={f.time}")
    lu = apply_L(f, center, guard_fraction, tail_tol)
    denom = lp_norm(f, 2) * lp_norm(lu, 2)
    if denom == 0:
        return 0.0
    return float(f.time * lp_norm(f, np.inf) ** 2 / denom)


def lu_energy_terms(f: Field, sigma: float, center: float = 0.0,
                    guard_fraction: float = 0.1, tail_tol: float = 1e-8) -> tuple:
    """The three contributions to ``d/dt ||Lu||_2^2`` along the flow.

    ``-(s+1) int d_x(|u|^(2s)) |Lu|^2``,
    ``s Re int d_x(|u|^(2s-2) u^2) conj(Lu)^2`` and
    ``2 Re int |u|^(2s) u conj(Lu)``.
    """
    _check_sigma(sigma)
    _guard(f, guard_fraction, tail_tol)
    u = f.samples
    dx = f.grid.dx
    p, q = _powers(u, sigma)
    lu = _apply(f, center).samples
    dp = derivative(f.with_samples(p.astype(complex)), 1).samples.real
    dq = derivative(f.with_samples(q), 1).samples
    t1 = -(sigma + 1) * np.sum(dp * np.abs(lu) ** 2) * dx
    t2 = sigma * np.real(np.sum(dq * np.conj(lu) ** 2)) * dx
    t3 = 2.0 * np.real(np.sum(p * u * np.conj(lu))) * dx
    return float(t1), float(t2), float(t3)


def lu_energy_rhs(f: Field, sigma: float, center: float = 0.0,
                  guard_fraction: float = 0.1, tail_tol: float = 1e-8) -> float:
    return float(sum(lu_energy_terms(f, sigma, center, guard_fraction, tail_tol)))


def fit_growth(times, values, t_min: float = 1.0, min_points: int = 10) -> GrowthFit:
    """Least-squares fit of ``log value`` against ``log <t>`` over ``t >= t_min``."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    keep = t >= t_min
    t, y = t[keep], y[keep]
    if t.size < min_points:
        raise InsufficientDataError(
            f"growth fit needs >= {min_points} points with t >= {t_min}, got {t.size}")
    if np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise DomainError("growth fit needs positive finite values")
    lx, ly = np.log(japanese(t)), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 if ss_tot == 0 else float(max(0.0, 1.0 - np.sum(resid ** 2) / ss_tot))
    return GrowthFit(float(slope), float(np.exp(intercept)), r2, (float(t[0]), float(t[-1])))


def lu_growth_fit(traj: Trajectory, center: float = 0.0, t_min: float = 1.0,
                  guard_fraction: float = 0.1, tail_tol: float = 1e-8) -> GrowthFit:
    """Growth exponent of ``||Lu(t)||_{H^1}`` in ``<t>`` over the snapshots with ``t >= t_min``."""
    times, vals = [], []
    for t, f in zip(traj.times, traj.snapshots.fields):
        if t < t_min:
            continue
        times.append(t)
        vals.append(sobolev_norm(apply_L(f, center, guard_fraction, tail_tol), 1.0))
    return fit_growth(times, vals, t_min)


def lu_equation_residual(before: Field, mid: Field, after: Field, sigma: float,
                         center: float = 0.0) -> float:
    """Relative L2 residual of the equation satisfied by ``w = Lu`` at ``mid``.

    ``i w_t + w_xx + i d_x((s+1)|u|^(2s) w - s |u|^(2s-2) u^2 conj(w)) - i |u|^(2s) u``
    with ``w_t`` from the centered difference of ``before`` and ``after``.
    """
    _check_sigma(sigma)
    h = after.time - before.time
    if not h > 0:
        raise DomainError("snapshots must be in increasing time order")
    w_prev = _apply(before, center).samples
    w_next = _apply(after, center).samples
    w = _apply(mid, center)
    u = mid.samples
    p, q = _powers(u, sigma)
    flux = (sigma + 1) * p * w.samples - sigma * q * np.conj(w.samples)
    res = (1j * (w_next - w_prev) / h + derivative(w, 2).samples
           + 1j * derivative(mid.with_samples(flux), 1).samples - 1j * p * u)
    norm = lp_norm(w, 2)
    out = lp_norm(mid.with_samples(res), 2)
    return float(out / norm) if norm > 0 else float(out)
