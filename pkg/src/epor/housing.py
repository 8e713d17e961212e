"""Housing-market activity models and scenario generators.

Three model kinds are supported:

* flat_random: h jumps at t0 to a random level and stays there;
* linear_ramp: h moves linearly from its mean at t0 to a random level at T*;
* ou: Ornstein-Uhlenbeck around a flat or linearly trending long-term mean.

Levels are never floored; Gaussian models can go negative and the logistic
intensity is defined on the whole real line.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.laguerre import laggauss

from .parallel import chunk_generators

KINDS = ("flat_random", "linear_ramp", "ou")
DISTRIBUTIONS = ("normal", "lognormal", "shifted_exponential")
TRENDS = ("flat", "increasing", "decreasing")

MU_HAT = 4.470e-2
VAR_HAT = 1.215e-4
ALPHA_HAT = 126.0
ETA_HAT = 0.115

CHUNK_SCENARIOS = 4096


@dataclass(frozen=True)
class HousingModel:
    kind: str = "ou"
    distribution: str = "normal"
    mean: float = MU_HAT
    variance: float = VAR_HAT
    ou_alpha: float = ALPHA_HAT
    ou_eta: float = ETA_HAT
    trend: str = "flat"
    h0: float | None = None
    t0: float = 0.0
    t_star: float = 10.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown housing model kind {self.kind!r}")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.trend not in TRENDS:
            raise ValueError(f"unknown trend {self.trend!r}")
        if not self.variance >= 0:
            raise ValueError("variance must be nonnegative")
        if self.kind == "ou" and not (self.ou_alpha > 0 and self.ou_eta >= 0):
            raise ValueError("OU needs alpha > 0 and eta >= 0")
        if self.kind != "ou" and self.distribution != "normal":
            level_params(self.distribution, self.mean, self.variance)
        if not self.t_star > self.t0:
            raise ValueError("t_star must exceed t0")

    def theta_coeffs(self):
        """(theta at t0, slope) of the affine long-term mean."""
        slope = 2.0 * np.sqrt(self.variance) / (self.t_star - self.t0)
        return self.mean, {"flat": 0.0, "increasing": slope, "decreasing": -slope}[self.trend]

    def theta(self, t):
        th0, th1 = self.theta_coeffs()
        return th0 + th1 * (np.asarray(t, dtype=float) - self.t0)

    @property
    def start_level(self) -> float:
        return self.mean if self.h0 is None else float(self.h0)


@dataclass(frozen=True)
class HousingScenario:
    grid: np.ndarray
    values: np.ndarray

    def at(self, t):
        return np.interp(t, self.grid, self.values)


class ScenarioSet:
    """A batch of scenarios on a common grid, values of shape (n, len(grid))."""

    def __init__(self, grid, values):
        self.grid = np.asarray(grid, dtype=float)
        self.values = np.atleast_2d(np.asarray(values, dtype=float))
        if self.values.shape[1] != self.grid.size:
            raise ValueError("scenario values do not match the grid")

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, i):
        return HousingScenario(self.grid, self.values[i])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @classmethod
    def from_scenarios(cls, scenarios):
        scenarios = list(scenarios)
        grid = scenarios[0].grid
        for s in scenarios:
            if s.grid.shape != grid.shape or np.any(s.grid != grid):
                raise ValueError("scenarios must share a grid")
        return cls(grid, np.stack([s.values for s in scenarios]))


def level_params(distribution: str, mean: float, variance: float):
    """Native parameters reproducing (mean, variance) exactly."""
    if distribution == "normal":
        return mean, np.sqrt(variance)
    if variance <= 0:
        raise ValueError(f"{distribution} needs a positive variance")
    if distribution == "lognormal":
        if mean <= 0:
            raise ValueError("lognormal needs a positive mean")
        s2 = np.log1p(variance / mean**2)
        return np.log(mean) - 0.5 * s2, np.sqrt(s2)
    if distribution == "shifted_exponential":
        sd = np.sqrt(variance)
        return mean - sd, sd
    raise ValueError(f"unknown distribution {distribution!r}")


def sample_levels(distribution: str, mean: float, variance: float, size, rng) -> np.ndarray:
    z = rng.standard_normal(size) if distribution != "shifted_exponential" else rng.standard_exponential(size)
    return _transform(distribution, mean, variance, z)


def _transform(distribution, mean, variance, z):
    if variance == 0:
        return np.full(np.shape(z), float(mean))
    a, b = level_params(distribution, mean, variance)
    if distribution == "normal":
        return a + b * z
    if distribution == "lognormal":
        return np.exp(a + b * z)
    return a + b * z


def level_quadrature(distribution: str, mean: float, variance: float, n: int = 64):
    """Nodes and weights integrating functions of the level against its law.

    Gauss-Hermite in the normal (or log-normal log) coordinate and
    Gauss-Laguerre in the exponential coordinate.
    """
    if variance == 0:
        return np.array([float(mean)]), np.array([1.0])
    if distribution == "shifted_exponential":
        z, w = laggauss(n)
    else:
        z, w = hermegauss(n)
        w = w / np.sqrt(2 * np.pi)
    return _transform(distribution, mean, variance, z), w / w.sum()


def mean_path(model: HousingModel, grid) -> HousingScenario:
    grid = np.asarray(grid, dtype=float)
    if model.kind != "ou":
        return HousingScenario(grid, np.full(grid.size, float(model.mean)))
    th0, th1 = model.theta_coeffs()
    a = model.ou_alpha
    u = grid - model.t0
    c = model.start_level - th0 + th1 / a
    return HousingScenario(grid, th0 + th1 * u - th1 / a + c * np.exp(-a * u))


def covariance(model: HousingModel, grid) -> np.ndarray:
    """Cov(h(s), h(t)) on the grid conditional on information at t0."""
    grid = np.asarray(grid, dtype=float)
    if model.kind == "flat_random":
        return np.full((grid.size, grid.size), float(model.variance))
    if model.kind == "linear_ramp":
        u = (grid - model.t0) / (model.t_star - model.t0)
        return model.variance * np.outer(u, u)
    a, eta = model.ou_alpha, model.ou_eta
    lo = np.minimum.outer(grid, grid) - model.t0
    gap = np.abs(np.subtract.outer(grid, grid))
    return eta**2 / (2 * a) * np.exp(-a * gap) * -np.expm1(-2 * a * lo)


def ou_step_sd(model: HousingModel, dt):
    a = model.ou_alpha
    return model.ou_eta * np.sqrt(-np.expm1(-2 * a * np.asarray(dt)) / (2 * a))


def _sample_chunk(model, grid, n, rng):
    m = mean_path(model, grid).values
    if model.kind == "flat_random":
        lev = sample_levels(model.distribution, model.mean, model.variance, n, rng)
        return np.repeat(lev[:, None], grid.size, axis=1)
    if model.kind == "linear_ramp":
        lev = sample_levels(model.distribution, model.mean, model.variance, n, rng)
        u = (grid - model.t0) / (model.t_star - model.t0)
        return model.mean + np.outer(lev - model.mean, u)
    dt = np.diff(grid)
    decay = np.exp(-model.ou_alpha * dt)
    sd = ou_step_sd(model, dt)
    z = rng.standard_normal((n, dt.size))
    y = np.zeros((n, grid.size))
    for k in range(dt.size):
        y[:, k + 1] = decay[k] * y[:, k] + sd[k] * z[:, k]
    return m + y


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing with at least two points")
    return grid


def scenario_chunks(model: HousingModel, grid, n: int, seed: int):
    """Lazily generated ScenarioSet chunks; chunk i uses child i of SeedSequence(seed)."""
    grid = _check_grid(grid)
    if n < 1:
        raise ValueError("need at least one scenario")
    for m, rng in chunk_generators(seed, n, CHUNK_SCENARIOS):
        yield ScenarioSet(grid, _sample_chunk(model, grid, m, rng))


def sample_scenarios(model: HousingModel, grid, n: int, seed: int) -> ScenarioSet:
    """Scenario paths with exact transitions, reproducible per seed."""
    parts = [c.values for c in scenario_chunks(model, grid, n, seed)]
    return ScenarioSet(np.asarray(grid, dtype=float), np.concatenate(parts, axis=0))


def write_scenarios_csv(scenarios: ScenarioSet, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario_id", "time", "h"])
        for i, row in enumerate(scenarios.values):
            for t, h in zip(scenarios.grid, row):
                w.writerow([i, f"{t:.10g}", f"{h:.17g}"])
