"""Experiment configuration: YAML schema, defaults, validation and emission.

Schema (every key optional except where an experiment needs it)::

    name: E1 | E2 | E3 | E4 | E5        # default E1
    sigma: float                        # default per experiment
    epsilon: float                      # data size, u0 = epsilon * exp(-x^2)
    d_constant: float                   # default 1 / (10 epsilon)
    seed: int                           # default 0
    output_dir: path                    # default runs/<name>
    data: gaussian | chirped | zero     # chirped = epsilon exp(-x^2 + i x)
    sim:
      n: int                            # grid points (power of two)
      length: float | null              # null: 8 v_max t_end from the data
      dt: float
      t_end: float
      dealias_fraction: float
      scheme: etdrk4 | ifrk4
      snapshots_per_octave: int         # dyadic-dense cadence from t = 1
      residual_spacing: float           # centered-difference step for time derivatives
      tail_guard_fraction: float
      tail_mass_tol: float
      dt_safety: float
    packet:
      points_per_packet: int
      quadrature_tol: float
      n_velocities: int
      velocity_quantile: float          # spectral cut defining W's velocity range
    soliton:                            # E4 only
      sigmas: [float]
      omegas: [float]
      c_factors: [float]                # c = factor * sqrt(omega)
      chain_sigmas: [float]             # c_k -> -2 sqrt(omega) sequence
      chain_levels: int
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .errors import ConfigError
from .packets import PacketConfig

__all__ = [
    "EXPERIMENTS",
    "SimSettings",
    "PacketSettings",
    "SolitonSettings",
    "ExperimentConfig",
    "config_from_dict",
    "parse_config",
    "parse_config_text",
    "config_to_dict",
    "emit_config",
]

EXPERIMENTS = ("E1", "E2", "E3", "E4", "E5")
ASYMPTOTIC = ("E2", "E3", "E5")
DATA_SHAPES = ("gaussian", "chirped", "zero")

# sigma and sim overrides applied before the user's keys
_DEFAULTS = {
    "E1": {"sigma": 2.0, "sim": {"n": 2 ** 15}},
    "E2": {"sigma": 1.0},
    "E3": {"sigma": 1.0},
    "E4": {"sigma": 1.0, "sim": {"t_end": 5.0}},
    "E5": {"sigma": 1.0},
}


@dataclass(frozen=True)
class SimSettings:
    n: int = 2 ** 16
    length: float | None = None
    dt: float = 0.02
    t_end: float = 128.0
    dealias_fraction: float = 2.0 / 3.0
    scheme: str = "etdrk4"
    snapshots_per_octave: int = 8
    residual_spacing: float = 1e-3
    tail_guard_fraction: float = 0.1
    tail_mass_tol: float = 1e-8
    dt_safety: float = 1.0


@dataclass(frozen=True)
class PacketSettings:
    points_per_packet: int = 64
    quadrature_tol: float = 1e-12
    n_velocities: int = 257
    velocity_quantile: float = 1e-24

    def packet_config(self) -> PacketConfig:
        return PacketConfig(points_per_packet=self.points_per_packet,
                            quadrature_tol=self.quadrature_tol)


@dataclass(frozen=True)
class SolitonSettings:
    sigmas: tuple = (1.0, 1.5, 2.0)
    omegas: tuple = (0.25, 1.0, 4.0)
    c_factors: tuple = (0.0, 1.0, -1.0, -1.9)
    chain_sigmas: tuple = (1.0, 1.5)
    chain_levels: int = 10


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "E1"
    sigma: float = 2.0
    epsilon: float = 0.05
    d_constant: float | None = None
    seed: int = 0
    output_dir: str | None = None
    data: str = "gaussian"
    sim: SimSettings = field(default_factory=SimSettings)
    packet: PacketSettings = field(default_factory=PacketSettings)
    soliton: SolitonSettings = field(default_factory=SolitonSettings)

    def __post_init__(self):
        if self.d_constant is None:
            object.__setattr__(self, "d_constant", 1.0 / (10.0 * self.epsilon))
        if self.output_dir is None:
            object.__setattr__(self, "output_dir", f"runs/{self.name}")
        _validate(self)


def _fail(key, msg):
    raise ConfigError(key, msg)


def _validate(cfg: ExperimentConfig):
    if cfg.name not in EXPERIMENTS:
        _fail("name", f"must be one of {', '.join(EXPERIMENTS)}, got {cfg.name!r}")
    if not cfg.sigma > 0:
        _fail("sigma", "must be positive")
    if not cfg.epsilon > 0:
        _fail("epsilon", "must be positive")
    if cfg.name in ASYMPTOTIC and cfg.epsilon > 0.2:
        _fail("epsilon", f"{cfg.name} is a small-data experiment; need epsilon <= 0.2")
    if cfg.name in ASYMPTOTIC and cfg.sigma < 1:
        _fail("sigma", f"{cfg.name} needs sigma >= 1")
    if not cfg.d_constant > 0:
        _fail("d_constant", "must be positive")
    if cfg.data not in DATA_SHAPES:
        _fail("data", f"must be one of {', '.join(DATA_SHAPES)}")
    s = cfg.sim
    if s.n < 8 or s.n & (s.n - 1):
        _fail("sim.n", "must be a power of two >= 8")
    if s.length is not None and not s.length > 0:
        _fail("sim.length", "must be positive or null")
    if not s.dt > 0:
        _fail("sim.dt", "must be positive")
    if not s.t_end > 0:
        _fail("sim.t_end", "must be positive")
    if not 0 < s.dealias_fraction <= 1:
        _fail("sim.dealias_fraction", "must lie in (0, 1]")
    if s.scheme not in ("etdrk4", "ifrk4"):
        _fail("sim.scheme", "must be etdrk4 or ifrk4")
    if s.snapshots_per_octave < 1:
        _fail("sim.snapshots_per_octave", "must be >= 1")
    if not 0 < s.residual_spacing < 0.5:
        _fail("sim.residual_spacing", "must lie in (0, 0.5)")
    if not 0 < s.tail_guard_fraction < 1:
        _fail("sim.tail_guard_fraction", "must lie in (0, 1)")
    if not s.tail_mass_tol > 0:
        _fail("sim.tail_mass_tol", "must be positive")
    if not 0 < s.dt_safety <= 1:
        _fail("sim.dt_safety", "must lie in (0, 1]")
    p = cfg.packet
    if p.points_per_packet < 8:
        _fail("packet.points_per_packet", "must be >= 8")
    if not p.quadrature_tol > 0:
        _fail("packet.quadrature_tol", "must be positive")
    if p.n_velocities < 4:
        _fail("packet.n_velocities", "must be >= 4")
    if not 0 < p.velocity_quantile < 1:
        _fail("packet.velocity_quantile", "must lie in (0, 1)")
    so = cfg.soliton
    for key in ("sigmas", "omegas", "chain_sigmas"):
        vals = getattr(so, key)
        if not vals or any(not v > 0 for v in vals):
            _fail(f"soliton.{key}", "must be a non-empty list of positive numbers")
    if any(abs(c) >= 2 for c in so.c_factors):
        _fail("soliton.c_factors", "need |c| < 2 sqrt(omega)")
    if so.chain_levels < 2:
        _fail("soliton.chain_levels", "must be >= 2")


_SECTIONS = {"sim": SimSettings, "packet": PacketSettings, "soliton": SolitonSettings}
_INT_KEYS = {"seed", "sim.n", "sim.snapshots_per_octave", "packet.points_per_packet",
             "packet.n_velocities", "soliton.chain_levels"}
_STR_KEYS = {"name", "output_dir", "data", "sim.scheme"}
_LIST_KEYS = {"soliton.sigmas", "soliton.omegas", "soliton.c_factors", "soliton.chain_sigmas"}
_NULLABLE = {"d_constant", "output_dir", "sim.length"}


def _coerce(key, value):
    if value is None:
        if key in _NULLABLE:
            return None
        _fail(key, "may not be null")
    if key in _STR_KEYS:
        if not isinstance(value, str):
            _fail(key, f"expected a string, got {type(value).__name__}")
        return value
    if key in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            _fail(key, f"expected an integer, got {value!r}")
        return value
    if key in _LIST_KEYS:
        if not isinstance(value, (list, tuple)):
            _fail(key, "expected a list")
        return tuple(_coerce(f"{key}[{i}]", v) for i, v in enumerate(value))
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        # yaml reads 1e-8 (no dot) as a string
        try:
            return float(value)
        except (TypeError, ValueError):
            _fail(key, f"expected a number, got {value!r}")
    return float(value)


def _section(cls, prefix, raw):
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        _fail(prefix, "expected a mapping")
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - names)
    if unknown:
        _fail(f"{prefix}.{unknown[0]}", "unknown key")
    return {k: _coerce(f"{prefix}.{k}", v) for k, v in raw.items()}


def config_from_dict(raw: dict) -> ExperimentConfig:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        _fail("<root>", "expected a mapping at the top level")
    top = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(raw) - top)
    if unknown:
        _fail(unknown[0], "unknown key")
    name = _coerce("name", raw.get("name", "E1"))
    if name not in EXPERIMENTS:
        _fail("name", f"must be one of {', '.join(EXPERIMENTS)}, got {name!r}")
    defaults = _DEFAULTS[name]
    kwargs = {"sigma": defaults["sigma"]}
    sections = {}
    for key, value in raw.items():
        if key in _SECTIONS:
            continue
        kwargs[key] = _coerce(key, value)
    for key, cls in _SECTIONS.items():
        merged = dict(defaults.get(key, {}))
        merged.update(_section(cls, key, raw.get(key)))
        sections[key] = cls(**merged)
    return ExperimentConfig(**kwargs, **sections)


def parse_config_text(text: str) -> ExperimentConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"not valid YAML: {exc}") from exc
    return config_from_dict(raw)


def parse_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from exc
    return parse_config_text(text)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    def plain(v):
        if isinstance(v, tuple):
            return [plain(x) for x in v]
        return v
    out = {}
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if dataclasses.is_dataclass(v):
            out[f.name] = {k: plain(x) for k, x in dataclasses.asdict(v).items()}
        else:
            out[f.name] = plain(v)
    return out


def emit_config(cfg: ExperimentConfig) -> str:
    """YAML with every default materialized; ``parse_config_text`` inverts it."""
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)
