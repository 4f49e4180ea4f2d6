"""Experiment configurations: one dataclass per subcommand, INI-backed.

Every config validates without side effects and reports all violations at
once. ``validate`` never raises; ``require_valid`` raises with the full list.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from typing import ClassVar

from .bell import Regime
from .polarizer import Source


class ConfigError(ValueError):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass
class ExperimentConfig:
    KIND: ClassVar[str] = ""
    seed: int = 0
    out: str = ""

    def violations(self) -> list[str]:
        v = []
        if self.seed < 0:
            v.append("seed must be >= 0")
        return v


def _hv_violations(c) -> list[str]:
    v = []
    if not c.sharpness >= 1.0:
        v.append("sharpness must be >= 1")
    if not 0.0 <= c.realign <= 1.0:
        v.append("realign must be in [0, 1]")
    if not c.imperfectness >= 0.0:
        v.append("imperfectness must be >= 0")
    if not c.imperfectness < 0.5:
        v.append("imperfectness must be < 0.5")
    return v


def _grid_violations(prefix, start, stop, step, lo=None, hi=None) -> list[str]:
    v = []
    if not step > 0:
        v.append(f"{prefix}_step must be > 0")
    if stop < start:
        v.append(f"{prefix}_stop must be >= {prefix}_start")
    if lo is not None and start < lo:
        v.append(f"{prefix}_start must be >= {lo}")
    if hi is not None and stop > hi:
        v.append(f"{prefix}_stop must be <= {hi}")
    return v


def _parses(parser, text, name) -> list[str]:
    try:
        parser(text)
    except ValueError:
        return [f"{name} {text!r} is not recognised"]
    return []


@dataclass
class BellBoundsConfig(ExperimentConfig):
    KIND: ClassVar[str] = "bell-bounds"
    regime: str = "all"
    dim: int = 2
    restarts: int = 20
    max_evals: int = 100_000
    n_random: int = 10_000

    def violations(self):
        v = super().violations()
        if self.regime != "all":
            v += _parses(Regime.parse, self.regime, "regime")
        if self.dim < 1:
            v.append("dim must be >= 1")
        if self.restarts < 1:
            v.append("restarts must be >= 1")
        if self.max_evals < 1:
            v.append("max_evals must be >= 1")
        if self.n_random < 0:
            v.append("n_random must be >= 0")
        return v


@dataclass
class LhvConfig(ExperimentConfig):
    KIND: ClassVar[str] = "lhv-enumerate"
    n_mixtures: int = 100_000

    def violations(self):
        v = super().violations()
        if self.n_mixtures < 1:
            v.append("n_mixtures must be >= 1")
        return v


@dataclass
class ChshConfig(ExperimentConfig):
    KIND: ClassVar[str] = "chsh-scan"
    source: str = "EntangledCopenhagen"
    a1: float = 45.0
    a2: float = 0.0
    b1: float = 22.5
    b2: float = 67.5
    n_pairs: int = 1_000_000
    sharpness: float = 1.0
    realign: float = 1.0
    imperfectness: float = 0.0

    def violations(self):
        v = super().violations() + _hv_violations(self)
        v += _parses(Source.parse, self.source, "source")
        if self.n_pairs < 1:
            v.append("n_pairs must be >= 1")
        return v


@dataclass
class PolarizerChainConfig(ExperimentConfig):
    KIND: ClassVar[str] = "polarizer-chain"
    model: str = "hv"
    theta_start: float = 0.0
    theta_stop: float = 90.0
    theta_step: float = 5.0
    n_photons: int = 100_000
    sharpness: float = 1.0
    realign: float = 1.0
    imperfectness: float = 0.0

    def violations(self):
        v = super().violations() + _hv_violations(self)
        if self.model not in ("copenhagen", "hv"):
            v.append("model must be copenhagen or hv")
        v += _grid_violations("theta", self.theta_start, self.theta_stop, self.theta_step)
        if self.n_photons < 1:
            v.append("n_photons must be >= 1")
        return v


@dataclass
class ThreePolConfig(ExperimentConfig):
    KIND: ClassVar[str] = "three-pol"
    model: str = "copenhagen"
    alpha_start: float = 0.0
    alpha_stop: float = 90.0
    alpha_step: float = 5.0
    n_photons: int = 100_000
    sharpness: float = 4.0
    realign: float = 0.5
    imperfectness: float = 0.0
    tol: float = 1e-4

    def violations(self):
        v = super().violations() + _hv_violations(self)
        if self.model not in ("copenhagen", "hv"):
            v.append("model must be copenhagen or hv")
        v += _grid_violations("alpha", self.alpha_start, self.alpha_stop, self.alpha_step, 0.0, 90.0)
        if self.model == "hv" and self.n_photons < 1:
            v.append("n_photons must be >= 1")
        if not self.tol > 0:
            v.append("tol must be > 0")
        return v


@dataclass
class CoincidenceConfig(ExperimentConfig):
    KIND: ClassVar[str] = "coincidence"
    source: str = "EntangledCopenhagen"
    alpha: float = 0.0
    beta_start: float = 0.0
    beta_stop: float = 180.0
    beta_step: float = 15.0
    n_pairs: int = 100_000
    sharpness: float = 1.0
    realign: float = 1.0
    imperfectness: float = 0.0

    def violations(self):
        v = super().violations() + _hv_violations(self)
        v += _parses(Source.parse, self.source, "source")
        v += _grid_violations("beta", self.beta_start, self.beta_stop, self.beta_step)
        if self.n_pairs < 1:
            v.append("n_pairs must be >= 1")
        return v


BOHM_MODES = ("identity", "convergence", "hamilton-jacobi", "coherent", "snapshot")


@dataclass
class BohmConfig(ExperimentConfig):
    KIND: ClassVar[str] = "bohm"
    mode: str = "identity"
    x_min: float = -10.0
    x_max: float = 10.0
    n: int = 2001
    k: float = 1.0
    levels: int = 3
    sigma: float = 1.0
    x0: float = 0.0
    p0: float = 1.0
    shift: float = 1.0
    dt: float = 1e-4
    steps: int = 200
    every: int = 100
    node_threshold: float = 1e-6
    bulk: float = 1e-3
    mass: float = 1.0
    hbar: float = 1.0

    def violations(self):
        v = super().violations()
        if self.mode not in BOHM_MODES:
            v.append(f"mode must be one of {', '.join(BOHM_MODES)}")
        if self.n < 64:
            v.append("n must be >= 64")
        if not self.x_max > self.x_min:
            v.append("x_max must exceed x_min")
        if not self.mass > 0:
            v.append("mass must be > 0")
        if not self.hbar > 0:
            v.append("hbar must be > 0")
        if not self.k > 0:
            v.append("k must be > 0")
        if self.levels < 1:
            v.append("levels must be >= 1")
        if not self.sigma > 0:
            v.append("sigma must be > 0")
        if not self.dt > 0:
            v.append("dt must be > 0")
        elif self.n >= 2 and self.x_max > self.x_min and self.mass > 0 and self.hbar > 0:
            dx = (self.x_max - self.x_min) / (self.n - 1)
            if self.dt > self.mass * dx * dx / self.hbar * (1 + 1e-9):
                v.append("dt must be <= m dx^2 / hbar")
        if self.steps < 0:
            v.append("steps must be >= 0")
        if self.every < 1:
            v.append("every must be >= 1")
        elif self.steps % self.every:
            v.append("steps must be a multiple of every")
        if not 0 < self.node_threshold < 1:
            v.append("node_threshold must be in (0, 1)")
        if not 0 <= self.bulk < 1:
            v.append("bulk must be in [0, 1)")
        return v


SCATTERING_MODES = ("trace", "transit", "decay")


@dataclass
class ScatteringConfig(ExperimentConfig):
    KIND: ClassVar[str] = "scattering"
    mode: str = "trace"
    x_min: float = -40.0
    x_max: float = 40.0
    n: int = 2001
    sigma: float = 1.0
    x0: float = 5.0
    p0: float = -2.0
    dt: float = 1e-3
    steps: int = 4000
    every: int = 100
    order: int = 4
    n_in: int = 1
    n_res: int = 1
    n_out: int = 1
    gamma: float = 1.0
    kappa: float = 0.0
    mixing: float = 0.0
    t_max: float = 3.0
    t_points: int = 31

    def violations(self):
        v = super().violations()
        if self.mode not in SCATTERING_MODES:
            v.append(f"mode must be one of {', '.join(SCATTERING_MODES)}")
        if self.n < 64:
            v.append("n must be >= 64")
        if not self.x_max > self.x_min:
            v.append("x_max must exceed x_min")
        if not self.sigma > 0:
            v.append("sigma must be > 0")
        if not self.dt > 0:
            v.append("dt must be > 0")
        elif self.n >= 2 and self.x_max > self.x_min:
            dx = (self.x_max - self.x_min) / (self.n - 1)
            if self.dt > dx * dx * (1 + 1e-9):
                v.append("dt must be <= m dx^2 / hbar")
        if self.every < 1:
            v.append("every must be >= 1")
        elif self.steps < 1 or self.steps % self.every:
            v.append("steps must be a positive multiple of every")
        if self.order not in (2, 4):
            v.append("order must be 2 or 4")
        for name in ("n_in", "n_res", "n_out"):
            if getattr(self, name) < 1:
                v.append(f"{name} must be >= 1")
        if not self.gamma > 0:
            v.append("gamma must be > 0")
        if self.kappa < 0:
            v.append("kappa must be >= 0")
        if self.mixing < 0:
            v.append("mixing must be >= 0")
        if not self.t_max > 0:
            v.append("t_max must be > 0")
        if self.t_points < 2:
            v.append("t_points must be >= 2")
        return v


@dataclass
class PhaseOpConfig(ExperimentConfig):
    KIND: ClassVar[str] = "phase-op"
    truncations: str = "16,32"
    omega: float = 1.0
    pauli_n: int = 24
    pauli_dx: float = 0.1

    def truncation_list(self) -> list[int]:
        return [int(t) for t in self.truncations.split(",") if t.strip()]

    def violations(self):
        v = super().violations()
        try:
            ns = self.truncation_list()
            if not ns:
                v.append("truncations must list at least one value")
            if any(n < 8 for n in ns):
                v.append("every truncation must be >= 8")
        except ValueError:
            v.append("truncations must be comma-separated integers")
        if not self.omega > 0:
            v.append("omega must be > 0")
        if self.pauli_n < 2:
            v.append("pauli_n must be >= 2")
        if not self.pauli_dx > 0:
            v.append("pauli_dx must be > 0")
        return v


CONFIG_TYPES: dict[str, type[ExperimentConfig]] = {
    c.KIND: c
    for c in (
        BellBoundsConfig,
        LhvConfig,
        ChshConfig,
        PolarizerChainConfig,
        ThreePolConfig,
        CoincidenceConfig,
        BohmConfig,
        ScatteringConfig,
        PhaseOpConfig,
    )
}


def validate(config: ExperimentConfig) -> list[str]:
    """All violations of ``config``; an empty list means it is valid."""
    return config.violations()


def require_valid(config: ExperimentConfig) -> None:
    v = validate(config)
    if v:
        raise ConfigError(v)


def _coerce(ftype, text: str):
    t = ftype if isinstance(ftype, str) else ftype.__name__
    if t == "int":
        return int(text)
    if t == "float":
        return float(text)
    return text


def config_fields(cls) -> list[dataclasses.Field]:
    return [f for f in dataclasses.fields(cls)]


def from_mapping(kind: str, values: dict[str, str]) -> ExperimentConfig:
    """Build a config of ``kind`` from string values; unknown keys are violations."""
    if kind not in CONFIG_TYPES:
        raise ConfigError([f"unknown experiment {kind!r}"])
    cls = CONFIG_TYPES[kind]
    fields = {f.name: f for f in config_fields(cls)}
    kwargs, errors = {}, []
    for key, text in values.items():
        if key not in fields:
            errors.append(f"unknown field {key!r} for {kind}")
            continue
        try:
            kwargs[key] = _coerce(fields[key].type, text)
        except ValueError:
            errors.append(f"{key} has invalid value {text!r}")
    if errors:
        raise ConfigError(errors)
    return cls(**kwargs)


def load_ini(text: str, kind: str) -> ExperimentConfig:
    """Read the ``[kind]`` section (plus an optional ``[common]`` section)."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.read_string(text)
    values: dict[str, str] = {}
    if cp.has_section("common"):
        values.update(cp["common"])
    if cp.has_section(kind):
        values.update(cp[kind])
    return from_mapping(kind, values)


def format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_ini_lines(config: ExperimentConfig) -> list[str]:
    """Section header and ``key = value`` lines; floats use repr so they round-trip."""
    lines = [f"[{config.KIND}]"]
    for f in config_fields(type(config)):
        if f.name == "out":
            continue
        lines.append(f"{f.name} = {format_value(getattr(config, f.name))}")
    return lines
