"""Flat ``key = value`` pipeline configuration.

Blank lines and ``#`` comments are ignored. Command-line flags override
file values. Interval keys (``bounds_x`` ...) take ``low,high``.
"""
from __future__ import annotations

import dataclasses
import os
import zlib
from dataclasses import dataclass, field

import numpy as np

from .backtest import RISK_FREE_ANNUAL
from .cointegration import DEFAULT_MAX_LAG
from .errors import ConfigError
from .estimation import DEFAULT_BOUNDS, MIN_SPREAD_LENGTH, DeConfig


def _interval(text):
    if isinstance(text, (tuple, list)):
        lo, hi = text
    else:
        parts = [p.strip() for p in str(text).split(",")]
        if len(parts) != 2:
            raise ConfigError(f"expected 'low,high', got {text!r}")
        lo, hi = parts
    return (float(lo), float(hi))


def _bool(text):
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in {"1", "true", "yes", "on"}:
        return True
    if value in {"0", "false", "no", "off"}:
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _optional_int(text):
    if text is None or str(text).strip().lower() in {"", "none"}:
        return None
    return int(text)


@dataclass
class PipelineConfig:
    data_path: str = "prices.csv"
    output_dir: str = "out"
    seed: int = 0
    workers: int = 1
    train_fraction: float = 0.8
    split_index: int | None = None
    max_lag: int = DEFAULT_MAX_LAG
    lag_order: int | None = None
    de_population: int = 40
    de_generations: int = 500
    de_weight: float = 0.8
    de_crossover: float = 0.9
    de_tolerance: float = 1e-8
    de_stall: int = 20
    bounds_x: tuple = DEFAULT_BOUNDS[0]
    bounds_y: tuple = DEFAULT_BOUNDS[1]
    bounds_z: tuple = DEFAULT_BOUNDS[2]
    bounds_v: tuple = DEFAULT_BOUNDS[3]
    min_spread_length: int = MIN_SPREAD_LENGTH
    c_min: float = 0.01
    c_max: float = 200.0
    c_count: int = 200
    c_spacing: str = "log"
    risk_free_annual: float = RISK_FREE_ANNUAL
    cost_per_trade: float = 0.0
    relative_drawdown: bool = False
    extra: dict = field(default_factory=dict, repr=False)

    def validate(self) -> PipelineConfig:
        if self.split_index is None and not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if self.max_lag < 1:
            raise ConfigError("max_lag must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.c_spacing not in {"log", "linear"}:
            raise ConfigError("c_spacing must be 'log' or 'linear'")
        if self.c_count < 1 or self.c_min < 0 or self.c_max < self.c_min:
            raise ConfigError("c grid needs count >= 1 and 0 <= c_min <= c_max")
        if self.c_spacing == "log" and self.c_min <= 0:
            raise ConfigError("log-spaced c grid needs c_min > 0")
        self.de_config(0)
        return self

    def c_grid(self) -> np.ndarray:
        if self.c_spacing == "log":
            return np.geomspace(self.c_min, self.c_max, self.c_count)
        return np.linspace(self.c_min, self.c_max, self.c_count)

    def de_config(self, seed: int) -> DeConfig:
        return DeConfig(
            population_size=self.de_population,
            max_generations=self.de_generations,
            differential_weight=self.de_weight,
            crossover_rate=self.de_crossover,
            seed=seed,
            bounds=(self.bounds_x, self.bounds_y, self.bounds_z, self.bounds_v),
            tolerance=self.de_tolerance,
            stall_generations=self.de_stall,
        )

    def pair_seed(self, pair_id: str) -> int:
        """DE seed for one pair: first 64-bit word of SeedSequence([seed, crc32(pair_id)])."""
        seq = np.random.SeedSequence([self.seed, zlib.crc32(pair_id.encode("utf-8"))])
        return int(seq.generate_state(1, dtype=np.uint64)[0])

    def snapshot(self) -> list[tuple[str, str]]:
        rows = []
        for f in dataclasses.fields(self):
            if f.name == "extra":
                continue
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(repr(float(v)) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            rows.append((f.name, str(value)))
        return rows


_CONVERTERS = {
    int: int,
    float: float,
    str: str,
    bool: _bool,
    tuple: _interval,
}


def _converter(name: str):
    if name in {"split_index", "lag_order"}:
        return _optional_int
    default = next(f for f in dataclasses.fields(PipelineConfig) if f.name == name)
    kind = type(default.default) if default.default is not dataclasses.MISSING else str
    return _CONVERTERS.get(kind, str)


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value")
        key, value = (t.strip() for t in line.split("=", 1))
        values[key] = value
    return values


def build_config(file_values: dict | None = None, overrides: dict | None = None) -> PipelineConfig:
    names = {f.name for f in dataclasses.fields(PipelineConfig)} - {"extra"}
    merged = dict(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    kwargs = {}
    for key, value in merged.items():
        if key not in names:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            kwargs[key] = _converter(key)(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None
    return PipelineConfig(**kwargs).validate()


def load_config(path: str | os.PathLike | None, overrides: dict | None = None) -> PipelineConfig:
    file_values = {}
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"no such config file: {path}")
        with open(path) as fh:
            file_values = parse_config_text(fh.read())
    return build_config(file_values, overrides)
