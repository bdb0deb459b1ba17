"""Experiment configuration: flat key=value files merged with command-line flags."""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

EXPERIMENTS = ("profile", "tvnu", "coalesce", "exact", "clt", "tails")
FORMATS = ("csv", "json-lines")

_DEFAULT_N = {"profile": (128,), "tvnu": (2000,), "coalesce": (64,), "exact": (4,), "clt": (2000,), "tails": (500,)}
_DEFAULT_REPLICAS = {"profile": 2000, "tvnu": 200_000, "coalesce": 200, "exact": 1, "clt": 100_000, "tails": 100_000}


class ConfigError(ValueError):
    pass


def _floats(v) -> tuple[float, ...]:
    if isinstance(v, str):
        v = [p for p in v.replace(",", " ").split() if p]
    return tuple(float(p) for p in v)


def _ints(v) -> tuple[int, ...]:
    if isinstance(v, str):
        v = [p for p in v.replace(",", " ").split() if p]
    elif isinstance(v, int):
        v = [v]
    return tuple(int(p) for p in v)


def _int(v) -> int:
    return int(v, 0) if isinstance(v, str) else int(v)


def _opt_float(v):
    return None if v is None or v == "" else float(v)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    n: tuple[int, ...] = ()
    s_grid: tuple[float, ...] = (-1.0, 0.0, 1.0)
    gamma_grid: tuple[float, ...] = (0.5, 1.0, 2.0)
    alpha: float | None = None
    theta: float = 0.0
    replicas: int | None = None
    t_max: float | None = None
    out: str | None = None
    format: str = "csv"
    threads: int | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if not self.n:
            object.__setattr__(self, "n", _DEFAULT_N[self.experiment])
        if self.replicas is None:
            object.__setattr__(self, "replicas", _DEFAULT_REPLICAS[self.experiment])
        if any(k < 1 for k in self.n):
            raise ConfigError("N must be positive")
        if self.replicas < 1:
            raise ConfigError("replica count must be at least 1")
        if not self.s_grid or not self.gamma_grid:
            raise ConfigError("grids must be nonempty")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must fit in 64 unsigned bits")

    def canonical(self) -> dict:
        """Fields that determine the output (not the path or thread count)."""
        d = dataclasses.asdict(self)
        for k in ("out", "threads"):
            d.pop(k)
        return d

    @property
    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


_PARSERS = {
    "experiment": str,
    "seed": _int,
    "n": _ints,
    "s_grid": _floats,
    "gamma_grid": _floats,
    "alpha": _opt_float,
    "theta": float,
    "replicas": int,
    "t_max": _opt_float,
    "out": str,
    "format": str,
    "threads": int,
}


def read_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, dashes in keys are allowed."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        k, v = (p.strip() for p in line.split("=", 1))
        k = k.replace("-", "_")
        if k not in _PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {k!r}")
        out[k] = v
    return out


def build_config(values: dict) -> ExperimentConfig:
    """Typed config from raw strings or values; ``None`` entries are ignored."""
    kw = {}
    for k, v in values.items():
        if v is None:
            continue
        if k not in _PARSERS:
            raise ConfigError(f"unknown key {k!r}")
        try:
            kw[k] = _PARSERS[k](v)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad value for {k}: {v!r}") from e
    if "experiment" not in kw:
        raise ConfigError("experiment not given")
    if "seed" not in kw:
        raise ConfigError("an explicit seed is required")
    return ExperimentConfig(**kw)
