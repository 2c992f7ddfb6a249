"""Maximum-likelihood fit of the latent OU spread model by differential evolution.

The optimiser is classic DE/rand/1/bin and *maximises* its objective.
All random numbers of a generation (donor indices, crossover masks) are
drawn from one PCG64 stream before any candidate is evaluated, so results
depend only on the seed and never on evaluation order.
"""
from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, EstimationFailedError, InputError
from .spread_model import (
    OUParams,
    SpreadSeries,
    StateSpaceParams,
    from_statespace,
    half_life,
    log_likelihood_batch,
)

logger = logging.getLogger(__name__)

# stand-in fitness for candidates whose likelihood cannot be evaluated
FAILED_FITNESS = -1e300

PARAM_NAMES = ("X", "Y", "Z", "V")
DEFAULT_BOUNDS = ((0.0, 1.0), (1e-6, 1.0 - 1e-6), (1e-8, 1.0), (0.0, 1.0))
MIN_SPREAD_LENGTH = 30


@dataclass(frozen=True)
class DeConfig:
    population_size: int = 40
    max_generations: int = 500
    differential_weight: float = 0.8
    crossover_rate: float = 0.9
    seed: int = 0
    bounds: tuple = DEFAULT_BOUNDS
    tolerance: float = 1e-8
    stall_generations: int = 20

    def __post_init__(self):
        if self.population_size < 4:
            raise ConfigError("population_size must be >= 4 for DE/rand/1")
        if self.max_generations < 1:
            raise ConfigError("max_generations must be >= 1")
        if not 0.0 < self.differential_weight <= 2.0:
            raise ConfigError("differential_weight must lie in (0, 2]")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ConfigError("crossover_rate must lie in [0, 1]")
        if self.tolerance < 0.0:
            raise ConfigError("tolerance must be >= 0")
        if self.stall_generations < 1:
            raise ConfigError("stall_generations must be >= 1")
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        for lo, hi in bounds:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ConfigError(f"bad bound interval [{lo}, {hi}]")
        object.__setattr__(self, "bounds", bounds)


@dataclass(frozen=True, eq=False)
class DeResult:
    x: np.ndarray
    fitness: float
    generations_run: int
    converged: bool
    fitness_history: np.ndarray
    evaluations: int


@dataclass(frozen=True, eq=False)
class FitResult:
    best_params: StateSpaceParams
    ou_params: OUParams
    log_likelihood: float
    generations_run: int
    converged: bool
    fitness_history: np.ndarray = field(repr=False)
    degenerate: bool = False


def _reflect(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    x = np.where(x < lo, 2.0 * lo - x, x)
    x = np.where(x > hi, 2.0 * hi - x, x)
    # a second excursion means the step exceeded the box width
    return np.clip(x, lo, hi)


def de_optimize(
    objective: Callable,
    config: DeConfig,
    vectorized: bool = False,
    callback: Callable | None = None,
) -> DeResult:
    """Maximise ``objective`` over the box ``config.bounds`` with DE/rand/1/bin.

    Args:
        objective: maps a parameter vector to a fitness, or an ``(n, d)``
            population to ``n`` fitnesses when ``vectorized`` is true.
            Non-finite fitness is replaced by :data:`FAILED_FITNESS`.
        config: hyper-parameters, bounds and seed.
        callback: called with every population about to be evaluated.

    Stops after ``max_generations`` or once the best fitness improved by
    less than ``tolerance`` over ``stall_generations`` generations.
    """
    n = config.population_size
    lo = np.array([b[0] for b in config.bounds])
    hi = np.array([b[1] for b in config.bounds])
    d = lo.size
    F, CR = config.differential_weight, config.crossover_rate
    rng = np.random.Generator(np.random.PCG64(config.seed))

    def evaluate(pop):
        if callback is not None:
            callback(pop)
        if vectorized:
            f = np.asarray(objective(pop), dtype=float).reshape(n)
        else:
            f = np.array([objective(row) for row in pop], dtype=float)
        return np.where(np.isfinite(f), f, FAILED_FITNESS)

    pop = lo + rng.random((n, d)) * (hi - lo)
    fit = evaluate(pop)
    evaluations = n
    history = []
    converged = False
    rows = np.arange(n)
    window = config.stall_generations
    for gen in range(config.max_generations):
        keys = rng.random((n, n))
        keys[rows, rows] = np.inf
        donors = np.argsort(keys, axis=1, kind="stable")[:, :3]
        mutant = pop[donors[:, 0]] + F * (pop[donors[:, 1]] - pop[donors[:, 2]])
        mutant = _reflect(mutant, lo, hi)
        cross = rng.random((n, d)) < CR
        cross[rows, rng.integers(0, d, size=n)] = True
        trial = np.where(cross, mutant, pop)

        trial_fit = evaluate(trial)
        evaluations += n
        better = trial_fit >= fit
        pop[better] = trial[better]
        fit[better] = trial_fit[better]
        history.append(fit.max())
        if len(history) > window and history[-1] - history[-1 - window] < config.tolerance:
            converged = True
            break

    best = int(np.argmax(fit))
    return DeResult(pop[best].copy(), float(fit[best]), len(history), converged,
                    np.asarray(history), evaluations)


def check_spread_bounds(bounds: Sequence) -> None:
    """Bounds must keep X >= 0, 0 < Y < 1, Z >= 0 and V >= 0."""
    if len(bounds) != 4:
        raise ConfigError("spread model needs bounds for X, Y, Z, V")
    (xl, _), (yl, yh), (zl, _), (vl, _) = bounds
    if xl < 0.0 or zl < 0.0 or vl < 0.0:
        raise ConfigError("X, Z and V bounds must be non-negative")
    if not (0.0 < yl and yh < 1.0):
        raise ConfigError("Y bounds must lie strictly inside (0, 1)")


def fit_spread_model(
    spread: SpreadSeries,
    config: DeConfig | None = None,
    min_length: int = MIN_SPREAD_LENGTH,
) -> FitResult:
    """Maximise the Kalman log-likelihood of ``spread`` over (X, Y, Z, V).

    Raises:
        InputError: spread shorter than ``min_length``.
        EstimationFailedError: no candidate had a finite likelihood.
    """
    config = config or DeConfig()
    check_spread_bounds(config.bounds)
    values = spread.values if isinstance(spread, SpreadSeries) else np.asarray(spread, dtype=float)
    if values.size < min_length:
        raise InputError(f"spread has {values.size} observations, need at least {min_length}")

    def objective(pop):
        return log_likelihood_batch(values, pop)

    res = de_optimize(objective, config, vectorized=True)
    if res.fitness <= FAILED_FITNESS:
        raise EstimationFailedError("every likelihood evaluation failed")
    x, y, z, v = (float(t) for t in res.x)
    best = StateSpaceParams(x, y, z, v)
    degenerate = bool(np.ptp(values) == 0.0)
    if degenerate:
        logger.warning("constant spread: likelihood is unbounded, fit is degenerate")
    return FitResult(best, from_statespace(best), res.fitness, res.generations_run,
                     res.converged, res.fitness_history, degenerate)


def fit_report_rows(fit: FitResult) -> list[tuple[str, object]]:
    p, ou = fit.best_params, fit.ou_params
    hl = half_life(ou)
    return [
        ("X", p.x), ("Y", p.y), ("Z", p.z), ("V", p.v),
        ("kappa", ou.kappa), ("mu", ou.mu), ("sigma", ou.sigma),
        ("half_life_ln2", hl.days), ("half_life_inverse_kappa", hl.inverse_kappa_days),
        ("log_likelihood", fit.log_likelihood),
        ("generations", fit.generations_run),
        ("converged", fit.converged),
        ("degenerate", fit.degenerate),
    ]


def write_fit_report(path: str | os.PathLike, fit: FitResult, extra: Sequence = ()) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["field", "value"])
        for key, value in list(extra) + fit_report_rows(fit):
            w.writerow([key, repr(float(value)) if isinstance(value, float) else value])


def read_fit_report(path: str | os.PathLike) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return {k: v for k, v in rows[1:]}
