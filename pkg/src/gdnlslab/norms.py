"""Lebesgue, Sobolev, Lorentz and mixed space-time norms of sampled fields.

Samples are read as piecewise-constant functions on cells of width ``dx``;
every Lorentz quantity below is then a closed-form sum over the decreasing
rearrangement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid

from .errors import ConsistencyError, DomainError, InsufficientDataError
from .grid import Field, Grid1D

__all__ = [
    "TimeSeriesField",
    "lp_norm",
    "sobolev_norm",
    "lorentz_norm",
    "lorentz_norm_values",
    "mixed_norm",
]


@dataclass(frozen=True, eq=False)
class TimeSeriesField:
    times: np.ndarray
    fields: tuple

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        fields = tuple(self.fields)
        if times.ndim != 1 or len(times) != len(fields):
            raise ConsistencyError("times and fields must have matching lengths")
        if np.any(np.diff(times) <= 0):
            raise ConsistencyError("times must be strictly increasing")
        if fields and any(f.grid != fields[0].grid for f in fields):
            raise ConsistencyError("all snapshots must share one grid")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "fields", fields)

    def __len__(self):
        return len(self.fields)

    @property
    def grid(self) -> Grid1D:
        return self.fields[0].grid

    def at(self, t: float, atol: float = 1e-9) -> Field:
        """Snapshot whose time matches ``t`` within ``atol``."""
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > atol:
            raise InsufficientDataError(f"no snapshot at t={t}")
        return self.fields[i]

    def index(self, t: float, atol: float = 1e-9) -> int:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > atol:
            raise InsufficientDataError(f"no snapshot at t={t}")
        return i


def _check_p(p):
    if not (p >= 1):
        raise DomainError(f"exponent p must be >= 1, got {p!r}")


def lp_norm(f: Field, p: float = 2.0) -> float:
    _check_p(p)
    a = np.abs(f.samples)
    if np.isinf(p):
        return float(a.max(initial=0.0))
    return float((np.sum(a ** p) * f.grid.dx) ** (1.0 / p))


def sobolev_norm(f: Field, s: float, kind: str = "inhomogeneous") -> float:
    """``||J^s f||_2`` (inhomogeneous) or ``||D^s f||_2`` (homogeneous), by Parseval."""
    g = f.grid
    if kind == "homogeneous":
        with np.errstate(divide="ignore"):
            symbol = np.abs(g.xi) ** float(s)
    elif kind == "inhomogeneous":
        symbol = (1.0 + g.xi ** 2) ** (0.5 * s)
    else:
        raise DomainError(f"kind must be 'homogeneous' or 'inhomogeneous', got {kind!r}")
    coeff = np.fft.fft(f.samples)
    if s != 0:
        symbol = symbol.copy()
        symbol[g.nyquist_index] = 0.0
    weighted = np.zeros(g.n)
    nz = coeff != 0
    if np.any(np.isinf(symbol[nz])):
        raise DomainError("homogeneous norm with s < 0 is infinite: nonzero mean")
    weighted[nz] = np.abs(symbol[nz] * coeff[nz]) ** 2
    # sum |u_hat|^2 / L with u_hat = dx * fft(u)
    return float(np.sqrt(weighted.sum() * g.dx / g.n))


def _cell_powers(n, dx, r):
    """``(j dx)^r - ((j-1) dx)^r`` for j = 1..n, without cancellation."""
    j = np.arange(2, n + 1, dtype=float)
    out = np.empty(n)
    out[0] = dx ** r
    out[1:] = dx ** r * j ** r * -np.expm1(r * np.log1p(-1.0 / j))
    return out


def lorentz_norm_values(values, dx: float, p: float, q: float) -> float:
    """Lorentz quasi-norm of the step function with given cell values.

    ``(int_0^inf (s^(1/p) f*(s))^q ds/s)^(1/q)`` with ``f*`` the decreasing
    rearrangement; for ``q = inf`` the supremum ``max_j a_j (j dx)^(1/p)``.
    """
    _check_p(p)
    if not (q >= 1):
        raise DomainError(f"exponent q must be >= 1, got {q!r}")
    a = np.sort(np.abs(np.asarray(values, dtype=complex)).ravel())[::-1]
    a = a[a > 0]
    if a.size == 0:
        return 0.0
    j = np.arange(1, a.size + 1, dtype=float)
    if np.isinf(q):
        return float(np.max(a * (j * dx) ** (1.0 / p)))
    r = q / p
    # scale by the peak so a**q cannot under- or overflow
    top = a[0]
    integral = (p / q) * np.sum((a / top) ** q * _cell_powers(a.size, dx, r))
    return float(top * integral ** (1.0 / q))


def lorentz_norm(f: Field, p: float, q: float) -> float:
    return lorentz_norm_values(f.samples, f.grid.dx, p, q)


def mixed_norm(ts: TimeSeriesField, q: float, p: float) -> float:
    """``L^q_t L^p_x`` norm with the trapezoid rule over the snapshot times."""
    if len(ts) < 2:
        raise InsufficientDataError("mixed_norm needs at least 2 snapshots")
    spatial = np.array([lp_norm(f, p) for f in ts.fields])
    if np.isinf(q):
        return float(spatial.max())
    _check_p(q)
    return float(trapezoid(spatial ** q, ts.times) ** (1.0 / q))
