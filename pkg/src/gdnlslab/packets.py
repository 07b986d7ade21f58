"""Wave packets ``Phi_v = exp(i x^2/4t) chi((x - v t)/sqrt(t))`` and the profile ``gamma(t, v)``.

``gamma(t, v) = int u conj(Phi_v) dx``.  Both evaluations below integrate
the band-limited interpolant of the samples, so they agree up to quadrature
error:

* ``gamma_physical`` refines the field by zero-padding until each packet
  spans ``points_per_packet`` samples and applies the rectangle rule;
* ``gamma_fourier`` sums ``u_hat(xi_k) conj(Phi_hat_v(xi_k)) / L`` over the
  grid frequencies, with ``Phi_hat_v`` in closed form around a tabulated
  transform of the chirped bump.

With ``F f(xi) = int f exp(-i x xi) dx``,
``Phi_hat_v(xi) = sqrt(t) exp(i t (v^2/4 - v xi)) G(eta)``, where
``eta = sqrt(t) (xi - v/2)`` and ``G = F[exp(i y^2/4) chi]``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from .errors import ConsistencyError, DomainError, InsufficientDataError, RangeError
from .grid import Field, Spectrum, derivative, interpolate, to_spectrum
from .norms import lp_norm
from .vector_field import apply_L

__all__ = [
    "PacketConfig",
    "PacketProfile",
    "chi",
    "wave_packet",
    "packet_residual",
    "packet_residual_ratio",
    "gamma_physical",
    "gamma_fourier",
    "profile",
    "profile_fourier",
    "fourier_transform_at",
    "difference_report",
    "remainder_from_profiles",
    "remainder_R",
    "FOURIER_PAIRING",
]

# u_hat(xi) ~ FOURIER_PAIRING * exp(-i t xi^2) * gamma(t, 2 xi) for large t,
# i.e. 2 pi / conj(int chi_1) with int chi_1 = sqrt(pi i) under our convention.
FOURIER_PAIRING = np.sqrt(4 * np.pi) * np.exp(0.25j * np.pi)


def _raw_bump(y):
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    inside = np.abs(y) < 1
    out[inside] = np.exp(-1.0 / (1.0 - y[inside] ** 2))
    return out


@functools.lru_cache(maxsize=None)
def _bump_mass(tol):
    val, _ = integrate.quad(lambda y: float(_raw_bump(y)), -1.0, 1.0,
                            epsabs=tol, epsrel=tol, limit=200)
    return val


@dataclass(frozen=True)
class PacketConfig:
    """The bump ``chi`` and quadrature settings.

    ``chi_norm`` is filled in at construction (``1 / int exp(-1/(1-y^2))``)
    when left as ``None``.
    """
    chi_kind: str = "bump"
    chi_norm: float | None = None
    quadrature_tol: float = 1e-12
    points_per_packet: int = 64
    table_step: float = 2.0 ** -6
    table_points: int = 2 ** 17

    def __post_init__(self):
        if self.chi_kind != "bump":
            raise DomainError(f"unknown chi_kind {self.chi_kind!r}; only 'bump' is available")
        if not self.quadrature_tol > 0:
            raise DomainError("quadrature_tol must be positive")
        if self.points_per_packet < 8:
            raise DomainError("points_per_packet must be >= 8")
        if self.chi_norm is None:
            object.__setattr__(self, "chi_norm", 1.0 / _bump_mass(self.quadrature_tol))
        elif not self.chi_norm > 0:
            raise DomainError("chi_norm must be positive")


@dataclass(frozen=True, eq=False)
class PacketProfile:
    time: float
    velocities: np.ndarray
    gamma: np.ndarray
    source: str = "physical"

    def __post_init__(self):
        v = np.asarray(self.velocities, dtype=float)
        g = np.asarray(self.gamma, dtype=complex)
        if v.ndim != 1 or v.shape != g.shape:
            raise ConsistencyError("velocities and gamma must have matching lengths")
        if v.size > 1 and np.any(np.diff(v) <= 0):
            raise ConsistencyError("velocities must be increasing")
        if not self.time > 0:
            raise DomainError(f"profile time must be positive, got {self.time}")
        if self.source not in ("physical", "fourier"):
            raise DomainError(f"unknown source {self.source!r}")
        v.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "velocities", v)
        object.__setattr__(self, "gamma", g)


def chi(y, cfg: PacketConfig, order: int = 0):
    """The normalized bump or its first two derivatives."""
    y = np.asarray(y, dtype=float)
    base = cfg.chi_norm * _raw_bump(y)
    if order == 0:
        return base
    inside = np.abs(y) < 1
    yi = y[inside]
    s = 1.0 - yi ** 2
    a = -2.0 * yi / s ** 2
    out = np.zeros_like(y)
    if order == 1:
        out[inside] = base[inside] * a
    elif order == 2:
        da = -2.0 / s ** 2 - 8.0 * yi ** 2 / s ** 3
        out[inside] = base[inside] * (a * a + da)
    else:
        raise DomainError("only derivatives up to order 2 are available")
    return out


def _check_time(t):
    if not t > 0:
        raise DomainError(f"packets need t > 0, got {t!r}")


def _check_support(v, t, grid):
    lo, hi = v * t - np.sqrt(t), v * t + np.sqrt(t)
    x = grid.x
    if lo <= x[0] or hi >= x[-1]:
        raise RangeError(
            f"packet support [{lo:.4g}, {hi:.4g}] leaves the box [{x[0]:.4g}, {x[-1]:.4g}]")


def wave_packet(v: float, t: float, grid, cfg: PacketConfig) -> Field:
    _check_time(t)
    _check_support(v, t, grid)
    x = grid.x
    y = (x - v * t) / np.sqrt(t)
    return Field(grid, t, np.exp(0.25j * x ** 2 / t) * chi(y, cfg))


def packet_residual(v: float, t: float, grid, cfg: PacketConfig) -> Field:
    """Closed form of ``(i d_t + d_x^2) Phi_v``.

    ``exp(i x^2/4t)/(2t) * d_x[i (x - v t) chi(Y) + 2 sqrt(t) chi'(Y)]``
    with ``Y = (x - v t)/sqrt(t)``; the bracket's derivative is
    ``i chi + i Y chi' + 2 chi''``.
    """
    _check_time(t)
    _check_support(v, t, grid)
    x = grid.x
    y = (x - v * t) / np.sqrt(t)
    inner = 1j * chi(y, cfg) + 1j * y * chi(y, cfg, 1) + 2.0 * chi(y, cfg, 2)
    return Field(grid, t, np.exp(0.25j * x ** 2 / t) * inner / (2.0 * t))


def packet_residual_ratio(v: float, t: float, grid, cfg: PacketConfig) -> float:
    """``||(i d_t + d_x^2) Phi_v||_1 / ||Phi_v||_1``; decays like ``1/t``."""
    return lp_norm(packet_residual(v, t, grid, cfg), 1) / lp_norm(wave_packet(v, t, grid, cfg), 1)


# ---------------------------------------------------------------- physical side

def _refined(f: Field, cfg: PacketConfig):
    """Band-limited interpolant of ``f`` on a grid fine enough for the packets."""
    g = f.grid
    width = 2.0 * np.sqrt(f.time)
    r = max(1, int(2 ** np.ceil(np.log2(cfg.points_per_packet * g.dx / width))))
    if r == 1:
        return g.x, f.samples, g.dx
    n, m = g.n, g.n * r
    c = np.fft.fft(f.samples)
    big = np.zeros(m, dtype=complex)
    h = n // 2
    big[:h] = c[:h]
    big[m - h + 1:] = c[h + 1:]
    # split the Nyquist coefficient so the interpolant is the symmetric one
    big[h] = 0.5 * c[h]
    big[m - h] = 0.5 * c[h]
    fine = np.fft.ifft(big) * r
    dxf = g.dx / r
    xf = g.x[0] + dxf * np.arange(m)
    return xf, fine, dxf


def _gamma_on(xf, uf, dxf, t, velocities, cfg, origin_grid):
    out = np.empty(len(velocities), dtype=complex)
    sq = np.sqrt(t)
    for i, v in enumerate(velocities):
        _check_support(v, t, origin_grid)
        lo = np.searchsorted(xf, v * t - sq)
        hi = np.searchsorted(xf, v * t + sq, side="right")
        xs = xf[lo:hi]
        packet = np.exp(0.25j * xs ** 2 / t) * chi((xs - v * t) / sq, cfg)
        out[i] = np.sum(uf[lo:hi] * np.conj(packet)) * dxf
    return out


def gamma_physical(f: Field, v: float, cfg: PacketConfig) -> complex:
    _check_time(f.time)
    xf, uf, dxf = _refined(f, cfg)
    return complex(_gamma_on(xf, uf, dxf, f.time, [v], cfg, f.grid)[0])


def profile(f: Field, velocities, cfg: PacketConfig) -> PacketProfile:
    """``gamma(t, v)`` over a velocity grid from the physical-space pairing."""
    _check_time(f.time)
    vel = np.asarray(velocities, dtype=float)
    xf, uf, dxf = _refined(f, cfg)
    return PacketProfile(f.time, vel, _gamma_on(xf, uf, dxf, f.time, vel, cfg, f.grid))


# ----------------------------------------------------------------- Fourier side

@functools.lru_cache(maxsize=4)
def _chirped_bump_table(cfg: PacketConfig):
    """Cubic spline of ``G(eta) = F[exp(i y^2/4) chi](eta)`` and its range."""
    h = 1.0 / 512.0
    m = cfg.table_points
    y = (np.arange(m) - m // 2) * h
    g = np.exp(0.25j * y ** 2) * chi(y, cfg)
    # G(eta_k) = h sum_j g_j exp(-i y_j eta_k), y_j = (j - m/2) h
    eta = 2 * np.pi * np.fft.fftfreq(m, d=h)
    vals = h * np.fft.fft(np.fft.ifftshift(g))
    order = np.argsort(eta)
    eta, vals = eta[order], vals[order]
    eta_max = min(abs(eta[0]), eta[-1], 0.5 * np.pi / h)
    keep = np.abs(eta) <= eta_max
    # table spacing 2 pi / (m h); thin it to the configured step for the spline
    stride = max(1, int(round(cfg.table_step / (eta[1] - eta[0]))))
    return CubicSpline(eta[keep][::stride], vals[keep][::stride]), eta_max


def chi1(eta, cfg: PacketConfig):
    """``exp(i eta^2) G(eta)`` with ``G`` the transform of ``exp(i y^2/4) chi``."""
    spline, eta_max = _chirped_bump_table(cfg)
    eta = np.asarray(eta, dtype=float)
    out = np.zeros(eta.shape, dtype=complex)
    inside = np.abs(eta) <= eta_max
    out[inside] = np.exp(1j * eta[inside] ** 2) * spline(eta[inside])
    return out


def packet_transform(v: float, t: float, xi, cfg: PacketConfig):
    """``Phi_hat_v(t, xi)`` in closed form."""
    _check_time(t)
    xi = np.asarray(xi, dtype=float)
    spline, eta_max = _chirped_bump_table(cfg)
    eta = np.sqrt(t) * (xi - 0.5 * v)
    out = np.zeros(xi.shape, dtype=complex)
    inside = np.abs(eta) <= eta_max
    phase = t * (0.25 * v * v - v * xi[inside])
    out[inside] = np.sqrt(t) * np.exp(1j * phase) * spline(eta[inside])
    return out


def _symmetric_spectrum(s: Spectrum):
    """Continuous-transform samples ``u_hat(xi_k)`` with the Nyquist term split over +-xi_N."""
    g = s.grid
    uh = np.array(s.coefficients)
    xi = np.array(g.xi)
    k = g.nyquist_index
    uh = np.append(uh, 0.5 * uh[k])
    uh[k] *= 0.5
    xi = np.append(xi, -xi[k])
    return xi, uh


def _gamma_fourier_many(s: Spectrum, velocities, cfg):
    _check_time(s.time)
    g = s.grid
    xi, uh = _symmetric_spectrum(s)
    live = np.abs(uh) > 0
    xi, uh = xi[live], uh[live]
    out = np.empty(len(velocities), dtype=complex)
    for i, v in enumerate(velocities):
        _check_support(v, s.time, g)
        out[i] = np.sum(uh * np.conj(packet_transform(v, s.time, xi, cfg))) / g.length
    return out


def gamma_fourier(s: Spectrum, v: float, cfg: PacketConfig) -> complex:
    """``(1/2 pi) int u_hat conj(Phi_hat_v) d xi`` as a sum over the grid frequencies."""
    return complex(_gamma_fourier_many(s, [v], cfg)[0])


def profile_fourier(f: Field, velocities, cfg: PacketConfig) -> PacketProfile:
    vel = np.asarray(velocities, dtype=float)
    return PacketProfile(f.time, vel, _gamma_fourier_many(to_spectrum(f), vel, cfg), "fourier")


# ------------------------------------------------------------ difference bounds

def fourier_transform_at(f: Field, xi) -> np.ndarray:
    """``u_hat(xi) = int u exp(-i x xi) dx`` at arbitrary frequencies (rectangle rule)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    x = f.grid.x
    out = np.empty(xi.shape, dtype=complex)
    for lo in range(0, xi.size, 64):
        block = xi[lo:lo + 64]
        out[lo:lo + 64] = np.exp(-1j * np.outer(block, x)) @ f.samples * f.grid.dx
    return out


def _l2_v(values, v):
    if len(v) < 2:
        return float(np.abs(values).max(initial=0.0))
    return float(np.sqrt(trapezoid(np.abs(values) ** 2, v)))


def difference_report(f: Field, p: PacketProfile, center: float = 0.0,
                      guard_fraction: float = 0.1, tail_tol: float = 1e-8) -> dict:
    """Normalized gaps between ``u`` and ``gamma`` along rays and in frequency.

    ``r1``/``r2``: ``u(t, vt) - t^(-1/2) e^{i v^2 t/4} gamma`` in sup / L2_v,
    scaled by ``t^(3/4)`` and ``t`` over ``||Lu||_2``;
    ``r3``: the same for ``u_x`` against ``(i v/2) t^(-1/2) e^{i v^2 t/4} gamma``;
    ``r4``/``r5``: ``u_hat(xi) - FOURIER_PAIRING e^{-i t xi^2} gamma(t, 2 xi)``
    scaled by ``t^(1/4)`` and ``t^(1/2)`` over ``||Lu||_2``.
    Also reported: ``||gamma||_{L2_v}/||u||_2``, ``||d_v gamma||_{L2_v}/||Lu||_2``
    and ``||v gamma||_{L2_v}/(||Lu||_2/t + ||u_x||_2)``.
    """
    t = f.time
    if abs(p.time - t) > 1e-12 * max(1.0, abs(t)):
        raise ConsistencyError(f"profile time {p.time} differs from field time {t}")
    v, gam = p.velocities, p.gamma
    lu = lp_norm(apply_L(f, center, guard_fraction, tail_tol), 2)
    ux = derivative(f, 1)
    lux = lp_norm(apply_L(ux, center, guard_fraction, 1.0), 2)
    u_l2, ux_l2 = lp_norm(f, 2), lp_norm(ux, 2)

    def ratio(num, den):
        return float(num / den) if den > 0 else 0.0

    phase = np.exp(0.25j * v * v * t)
    on_ray = interpolate(f, v * t)
    d_u = on_ray - phase * gam / np.sqrt(t)
    d_ux = interpolate(ux, v * t) - 0.5j * v * phase * gam / np.sqrt(t)
    xi = 0.5 * v
    d_hat = fourier_transform_at(f, xi) - FOURIER_PAIRING * np.exp(-1j * t * xi ** 2) * gam
    dv_gamma = np.gradient(gam, v) if len(v) > 2 else np.zeros_like(gam)
    return {
        "time": float(t),
        "r1": ratio(t ** 0.75 * np.abs(d_u).max(initial=0.0), lu),
        "r2": ratio(t * _l2_v(d_u, v), lu),
        "r3": ratio(t ** 0.75 * np.abs(d_ux).max(initial=0.0), lu + lux),
        "r4": ratio(t ** 0.25 * np.abs(d_hat).max(initial=0.0), lu),
        "r5": ratio(t ** 0.5 * _l2_v(d_hat, xi), lu),
        "gamma_l2_ratio": ratio(_l2_v(gam, v), u_l2),
        "dv_gamma_ratio": ratio(_l2_v(dv_gamma, v), lu),
        "v_gamma_ratio": ratio(_l2_v(v * gam, v), lu / t + ux_l2),
    }


# -------------------------------------------------------------------- remainder

def remainder_from_profiles(before: PacketProfile, mid: PacketProfile,
                            after: PacketProfile, sigma: float) -> np.ndarray:
    """``R = (v t^(-s)/2)|gamma|^(2s) gamma - i gamma_t`` at ``mid.time``.

    ``gamma_t`` is the three-point centered difference on the (possibly
    uneven) snapshot spacing.
    """
    for q in (before, after):
        if q.velocities.shape != mid.velocities.shape or np.any(q.velocities != mid.velocities):
            raise ConsistencyError("profiles use different velocity grids")
    t0, t1, t2 = before.time, mid.time, after.time
    if not t0 < t1 < t2:
        raise DomainError("profiles must be ordered in time around the midpoint")
    h0, h1 = t1 - t0, t2 - t1
    g0, g1, g2 = before.gamma, mid.gamma, after.gamma
    gt = (-h1 / (h0 * (h0 + h1)) * g0 + (h1 - h0) / (h0 * h1) * g1
          + h0 / (h1 * (h0 + h1)) * g2)
    v = mid.velocities
    return 0.5 * v * t1 ** (-sigma) * np.abs(g1) ** (2 * sigma) * g1 - 1j * gt


def remainder_R(traj, t: float, v, cfg: PacketConfig):
    """Remainder of the asymptotic ODE at snapshot time ``t`` and velocity/velocities ``v``."""
    i = traj.snapshots.index(t)
    if i == 0 or i == len(traj.snapshots) - 1:
        raise InsufficientDataError(f"t={t} lies on the boundary of the snapshot range")
    fields = traj.snapshots.fields
    profs = [profile(fields[j], np.atleast_1d(v), cfg) for j in (i - 1, i, i + 1)]
    out = remainder_from_profiles(*profs, traj.config.sigma)
    return complex(out[0]) if np.ndim(v) == 0 else out
