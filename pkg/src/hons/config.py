"""Flat ``key = value`` run configuration.

Lines are UTF-8, ``#`` starts a comment, blank lines are ignored.  Every key
maps to one field of ``RunConfig``; unknown or repeated keys are errors that
name the offending line.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .dispersion import PRESETS, PhysicsParams
from .grid import PairState, PeriodicGrid, SpectralField, random_field

COMMANDS = ("simulate", "picard", "norms", "verify", "estimate")
INITIAL_KINDS = ("random", "modes", "plane_wave", "file")
PARAM_KEYS = ("q", "gamma", "beta", "mu", "alpha", "sigma_alpha", "sigma_beta", "sigma_mu")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


Modes = tuple[tuple[int, complex], ...]


@dataclass(frozen=True)
class RunConfig:
    experiment: str = "simulate"
    preset: str = ""
    # physics
    q: float = 1.0
    gamma: float = 2.0
    beta: float = 0.0
    mu: float = 0.0
    alpha: float = 0.0
    sigma_alpha: float = 1.0
    sigma_beta: float = 1.0
    sigma_mu: float = 1.0
    # discretisation
    n_modes: int = 128
    T: float = 1.0
    dt: float = 1e-3
    save_every: int = 100
    formulation: str = "gauged"
    # initial data
    initial: str = "random"
    init_amplitude: float = 0.3
    init_kmax: int = 6
    init_decay: float = 2.0
    init_u: Modes = ()
    init_w: Modes = ()
    init_file: str = ""
    # picard
    picard_T: float = 0.05
    picard_nodes: int = 65
    picard_max_iter: int = 30
    picard_tol: float = 1e-12
    # norms / estimates
    s: float = 0.5
    theta: float = 1.0 / 24.0
    ensemble_size: int = 200
    band: int = 2
    # bookkeeping
    seed: int = 0
    out_dir: str = "out"

    @property
    def params(self) -> PhysicsParams:
        return PhysicsParams(**{k: getattr(self, k) for k in PARAM_KEYS})

    @property
    def grid(self) -> PeriodicGrid:
        return PeriodicGrid(self.n_modes)

    def replace(self, **kw) -> "RunConfig":
        return dataclasses.replace(self, **kw)

    def initial_state(self, seed: int | None = None) -> PairState:
        grid = self.grid
        seed = self.seed if seed is None else seed
        if self.initial == "random":
            rng = np.random.default_rng(seed)
            u = random_field(grid, rng, self.init_decay, self.init_kmax, self.init_amplitude)
            w = random_field(grid, rng, self.init_decay, self.init_kmax, self.init_amplitude)
            return PairState(u, w)
        if self.initial == "modes":
            return PairState(SpectralField.from_modes(grid, dict(self.init_u)),
                             SpectralField.from_modes(grid, dict(self.init_w)))
        if self.initial == "plane_wave":
            k = self.init_kmax
            return PairState(SpectralField.from_modes(grid, {k: self.init_amplitude}), SpectralField.zeros(grid))
        from .snapshot import read_snapshot

        st = read_snapshot(self.init_file)
        if st.grid != grid:
            raise ConfigError(f"snapshot has N={st.grid.n_modes}, config has n_modes={self.n_modes}")
        return st


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_modes(text: str) -> Modes:
    out = []
    for item in text.replace(",", " ").split():
        n, sep, val = item.partition(":")
        if not sep:
            raise ValueError(f"mode entry {item!r} is not of the form n:value")
        out.append((int(n), complex(val)))
    return tuple(out)


def _format_modes(modes: Modes) -> str:
    return " ".join(f"{n}:{repr(complex(v)).strip('()')}" for n, v in modes)


def _convert(key: str, raw: str):
    t = _FIELD_TYPES[key]
    if t == "int":
        return int(raw)
    if t == "float":
        return float(raw)
    if t == "Modes":
        return _parse_modes(raw)
    return raw


def validate(cfg: RunConfig, line_of: dict[str, int] | None = None) -> None:
    line_of = line_of or {}

    def fail(key, msg):
        raise ConfigError(msg, line_of.get(key))

    if cfg.experiment not in COMMANDS:
        fail("experiment", f"experiment must be one of {COMMANDS}, got {cfg.experiment!r}")
    if cfg.initial not in INITIAL_KINDS:
        fail("initial", f"initial must be one of {INITIAL_KINDS}, got {cfg.initial!r}")
    if cfg.formulation not in ("gauged", "direct"):
        fail("formulation", f"formulation must be 'gauged' or 'direct', got {cfg.formulation!r}")
    if cfg.n_modes < 8 or cfg.n_modes % 2:
        fail("n_modes", f"n_modes must be an even integer >= 8, got {cfg.n_modes}")
    if cfg.dt <= 0 or cfg.T <= 0:
        fail("dt" if cfg.dt <= 0 else "T", "T and dt must be positive")
    if abs(round(cfg.T / cfg.dt) * cfg.dt - cfg.T) > 1e-9 * cfg.T:
        fail("dt", f"dt={cfg.dt!r} does not divide T={cfg.T!r}")
    if cfg.save_every < 1:
        fail("save_every", "save_every must be >= 1")
    if cfg.gamma == 0:
        fail("gamma", "gamma must be non-zero")
    if cfg.initial == "file":
        if not cfg.init_file or not Path(cfg.init_file).is_file():
            fail("init_file", f"initial data file {cfg.init_file!r} does not exist")
    if cfg.picard_nodes < 8:
        fail("picard_nodes", "picard_nodes must be >= 8")
    if not 0 < cfg.theta < 1 / 12:
        fail("theta", "theta must lie in (0, 1/12)")
    if cfg.preset:
        if cfg.preset not in PRESETS:
            fail("preset", f"unknown preset {cfg.preset!r}; expected one of {PRESETS}")
        try:
            cfg.params.check_preset(cfg.preset)
        except ValueError as e:
            fail("preset", str(e))


def parse_config(text: str) -> RunConfig:
    values: dict[str, object] = {}
    line_of: dict[str, int] = {}
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", i)
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown key {key!r}", i)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {line_of[key]})", i)
        try:
            values[key] = _convert(key, val)
        except ValueError as e:
            raise ConfigError(f"bad value for {key!r}: {e}", i) from None
        line_of[key] = i
    cfg = RunConfig(**values)
    validate(cfg, line_of)
    return cfg


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def serialize(cfg: RunConfig) -> str:
    lines = []
    for f in fields(RunConfig):
        v = getattr(cfg, f.name)
        if f.type == "Modes":
            s = _format_modes(v)
        elif f.type == "float":
            s = repr(float(v))
        else:
            s = str(v)
        lines.append(f"{f.name} = {s}")
    return "\n".join(lines) + "\n"
