"""Prepayment-at-relocation option value.

V = int_{t0}^{T*} C(T) E[f^h(T)] dT, with C(T) the receiver swaption on the
remaining mortgage schedule. C jumps down at every payment date, so the
maturity integral runs segment by segment between payment dates, using the
value just before the payment (left limit) at each segment end.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import cumulative_simpson

from .housing import (HousingModel, HousingScenario, ScenarioSet, covariance, level_quadrature, mean_path,
                      sample_scenarios)
from .hullwhite import HullWhiteParams
from .instruments import AmortizingSwapSpec, swaption_prices
from .relocation import (IntensityParams, RelocationDensityResult, density_paths, expected_density,
                         intensity, intensity_derivatives)

MIN_GRID_POINTS = 16


def make_grid(t0: float, t_star: float, step: float, breakpoints=()) -> np.ndarray:
    """Piecewise-uniform grid hitting every breakpoint, an even number of steps per segment."""
    knots = np.unique(np.concatenate(([t0, t_star], [b for b in breakpoints if t0 < b < t_star])))
    parts = []
    for a, b in zip(knots[:-1], knots[1:]):
        m = max(2, int(np.ceil((b - a) / step - 1e-9)))
        m += m % 2
        parts.append(np.linspace(a, b, m + 1)[:-1])
    parts.append([t_star])
    return np.concatenate(parts)


@dataclass(frozen=True)
class MaturityGrid:
    """Quadrature nodes over [t0, T*] with duplicated nodes at payment dates.

    times: the distinct grid; node_index maps nodes to times; node_left marks
    nodes carrying the left-limit swaption value.
    """

    times: np.ndarray
    node_index: np.ndarray
    node_left: np.ndarray
    seg_bounds: tuple
    cum_weights: tuple = field(repr=False)

    @classmethod
    def build(cls, times, spec: AmortizingSwapSpec):
        times = np.asarray(times, dtype=float)
        if times.size < MIN_GRID_POINTS:
            raise ValueError(f"maturity grid needs at least {MIN_GRID_POINTS} points")
        if np.any(np.diff(times) <= 0):
            raise ValueError("maturity grid must be strictly increasing")
        t0, t_star = times[0], times[-1]
        if t_star > spec.end + 1e-9:
            raise ValueError("maturity grid extends past the last payment date")
        brk = [d for d in spec.payment_dates if t0 + 1e-9 < d <= t_star + 1e-9]
        pos = []
        for d in brk:
            k = int(np.argmin(np.abs(times - d)))
            if abs(times[k] - d) > 1e-9:
                raise ValueError(f"maturity grid must contain payment date {d}")
            pos.append(k)
        ends = sorted(set(pos) | {times.size - 1})
        idx, left, bounds, cws = [], [], [], []
        start = 0
        for e in ends:
            seg = np.arange(start, e + 1)
            lo = len(idx)
            idx.extend(seg)
            flags = np.zeros(seg.size, dtype=bool)
            flags[-1] = e in pos
            left.extend(flags)
            bounds.append((lo, len(idx)))
            x = times[seg]
            if seg.size >= 3:
                cws.append(cumulative_simpson(np.eye(seg.size), x=x, axis=-1, initial=0.0))
            else:
                cws.append(np.array([[0.0, 0.5 * (x[1] - x[0])], [0.0, 0.5 * (x[1] - x[0])]]))
            start = e
        return cls(times, np.array(idx), np.array(left), tuple(bounds), tuple(cws))

    @property
    def node_times(self) -> np.ndarray:
        return self.times[self.node_index]

    @property
    def n_nodes(self) -> int:
        return self.node_index.size

    @property
    def weights(self) -> np.ndarray:
        w = np.zeros(self.n_nodes)
        for (lo, hi), cw in zip(self.seg_bounds, self.cum_weights):
            w[lo:hi] = cw[:, -1]
        return w

    def cumulative_weights(self, t: float) -> np.ndarray:
        """Node weights of the integral over [t0, t]; linear in t between nodes."""
        w = np.zeros(self.n_nodes)
        t = min(max(t, self.times[0]), self.times[-1])
        for (lo, hi), cw in zip(self.seg_bounds, self.cum_weights):
            x = self.times[self.node_index[lo:hi]]
            if t >= x[-1]:
                w[lo:hi] = cw[:, -1]
                continue
            if t <= x[0]:
                break
            k = int(np.searchsorted(x, t, side="right")) - 1
            frac = (t - x[k]) / (x[k + 1] - x[k])
            w[lo:hi] = (1 - frac) * cw[:, k] + frac * cw[:, k + 1]
            break
        return w

    def range_weights(self, a: float, b: float) -> np.ndarray:
        return self.cumulative_weights(b) - self.cumulative_weights(a)

    def to_nodes(self, values) -> np.ndarray:
        """Map values on `times` (last axis) to the nodes."""
        return np.asarray(values)[..., self.node_index]


def swaption_profile(params: HullWhiteParams, spec: AmortizingSwapSpec, grid: MaturityGrid,
                     strike=None) -> np.ndarray:
    t = grid.node_times
    out = np.empty(grid.n_nodes)
    right = ~grid.node_left
    out[right] = swaption_prices(params, spec, t[right], strike)
    if grid.node_left.any():
        out[grid.node_left] = swaption_prices(params, spec, t[grid.node_left], strike, left_limit=True)
    return out


def to_bps(value, spec: AmortizingSwapSpec):
    return np.asarray(value) / spec.initial_notional * 1e4


def price(params: HullWhiteParams, spec: AmortizingSwapSpec, density: RelocationDensityResult,
          strike=None) -> float:
    """V in currency; use to_bps for basis points of the initial notional."""
    grid = MaturityGrid.build(density.grid, spec)
    c = swaption_profile(params, spec, grid, strike)
    return float(grid.weights @ (c * grid.to_nodes(density.expected_density)))


def scenario_values(params: HullWhiteParams, spec: AmortizingSwapSpec, scenarios,
                    intensity_params: IntensityParams, strike=None, profile=None) -> np.ndarray:
    """V_h per scenario on a shared maturity grid, C computed once."""
    if not isinstance(scenarios, ScenarioSet):
        scenarios = ScenarioSet.from_scenarios(scenarios)
    grid = MaturityGrid.build(scenarios.grid, spec)
    c = swaption_profile(params, spec, grid, strike) if profile is None else profile
    f, _ = density_paths(intensity_params, scenarios.grid, scenarios.values)
    return grid.to_nodes(f) @ (grid.weights * c)


@dataclass(frozen=True)
class DiscreteHessian:
    grid: np.ndarray
    matrix: np.ndarray
    T: float
    density: float


def trapezoid_weights(grid) -> np.ndarray:
    dt = np.diff(np.asarray(grid, dtype=float))
    w = np.zeros(dt.size + 1)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


def path_density(intensity_params: IntensityParams, grid, h) -> float:
    """lambda(h_K) exp(-trapezoid sum of lambda(h_k)), the density at the last grid time."""
    lam = intensity(intensity_params, h)
    return float(lam[-1] * np.exp(-trapezoid_weights(grid) @ lam))


def hessian_matrix(intensity_params: IntensityParams, grid, h) -> np.ndarray:
    """Second derivatives of path_density in the path values h_0..h_K."""
    lam, d1, d2 = intensity_derivatives(intensity_params, np.asarray(h, dtype=float))
    w = trapezoid_weights(grid)
    f = lam[-1] * np.exp(-w @ lam)
    s1 = d1 * w
    hm = np.outer(s1, s1) - np.diag(d2 * w)
    hm[-1, -1] += d2[-1] / lam[-1]
    hm[-1, :] -= s1 * d1[-1] / lam[-1]
    hm[:, -1] -= s1 * d1[-1] / lam[-1]
    return f * hm


def discrete_hessian(intensity_params: IntensityParams, reference_path: HousingScenario, T: float,
                     K_steps: int) -> DiscreteHessian:
    if K_steps < 8:
        raise ValueError("K_steps must be at least 8")
    t0 = reference_path.grid[0]
    if not t0 < T <= reference_path.grid[-1] + 1e-12:
        raise ValueError("T must lie inside the reference grid")
    grid = t0 + (T - t0) * np.arange(K_steps + 1) / K_steps
    h = reference_path.at(grid)
    return DiscreteHessian(grid, hessian_matrix(intensity_params, grid, h), T,
                           path_density(intensity_params, grid, h))


def hessian_contraction(intensity_params: IntensityParams, grid, h, cov) -> np.ndarray:
    """sum_ij d2f(T_K)/dh_i dh_j Cov(h_i, h_j) for every grid time T_K."""
    grid = np.asarray(grid, dtype=float)
    lam, d1, d2 = intensity_derivatives(intensity_params, np.asarray(h, dtype=float))
    dt = np.diff(grid)
    out = np.empty(grid.size)
    for k in range(grid.size):
        w = np.zeros(k + 1)
        if k:
            w[:-1] += 0.5 * dt[:k]
            w[1:] += 0.5 * dt[:k]
        s1 = d1[: k + 1] * w
        c = cov[: k + 1, : k + 1]
        cs = c @ s1
        f = lam[k] * np.exp(-w @ lam[: k + 1])
        out[k] = f * (s1 @ cs - np.sum(d2[: k + 1] * w * np.diag(c))
                      + d2[k] / lam[k] * c[k, k] - 2 * d1[k] / lam[k] * cs[k])
    return out


def baseline_and_adjustment(params: HullWhiteParams, spec: AmortizingSwapSpec, model: HousingModel,
                            intensity_params: IntensityParams, grid, strike=None, profile=None):
    """(V at the mean path, second-order housing adjustment), both in currency."""
    grid = np.asarray(grid, dtype=float)
    mg = MaturityGrid.build(grid, spec)
    c = swaption_profile(params, spec, mg, strike) if profile is None else profile
    hbar = mean_path(model, grid).values
    fbar, _ = density_paths(intensity_params, grid, hbar)
    q = hessian_contraction(intensity_params, grid, hbar, covariance(model, grid))
    wc = mg.weights * c
    return float(wc @ mg.to_nodes(fbar)), float(0.5 * wc @ mg.to_nodes(q))


def ramp_density_quadrature(intensity_params: IntensityParams, model: HousingModel, grid,
                            points: int = 64) -> RelocationDensityResult:
    """Expected density of the linear-ramp model by quadrature over its terminal level."""
    if model.kind != "linear_ramp":
        raise ValueError("ramp quadrature needs a linear_ramp model")
    grid = np.asarray(grid, dtype=float)
    nodes, w = level_quadrature(model.distribution, model.mean, model.variance, points)
    u = (grid - model.t0) / (model.t_star - model.t0)
    paths = model.mean + np.outer(nodes - model.mean, u)
    f, s = density_paths(intensity_params, grid, paths)
    return RelocationDensityResult(grid, w @ f, float(w @ s[:, -1]), np.zeros(grid.size), "quadrature")


@dataclass
class EporValuation:
    value: float
    baseline: float
    adjustment: float
    scenario_values: np.ndarray
    quantile_band: tuple
    maturity_weights: np.ndarray
    node_times: np.ndarray
    swaption_values: np.ndarray
    expected_density: np.ndarray
    notional: float

    def bps(self, v):
        return float(v) / self.notional * 1e4

    def report(self) -> dict:
        return {
            "value_bps": self.bps(self.value),
            "baseline_bps": self.bps(self.baseline),
            "adjustment_bps": self.bps(self.adjustment),
            "ci10_bps": self.bps(self.quantile_band[0]),
            "ci90_bps": self.bps(self.quantile_band[1]),
        }


def valuate(params: HullWhiteParams, spec: AmortizingSwapSpec, model: HousingModel,
            intensity_params: IntensityParams, grid, n_scenarios: int = 1000, seed: int = 0,
            strike=None, density_mode: str = "auto") -> EporValuation:
    """Value, mean-path baseline, adjustment and the scenario-value band."""
    grid = np.asarray(grid, dtype=float)
    mg = MaturityGrid.build(grid, spec)
    c = swaption_profile(params, spec, mg, strike)
    if density_mode == "auto" and model.kind == "linear_ramp":
        density = ramp_density_quadrature(intensity_params, model, grid)
    else:
        density = expected_density(intensity_params, model, grid, n_scenarios, seed, density_mode)
    scen = density.scenarios
    if scen is None:
        scen = sample_scenarios(model, grid, n_scenarios, seed)
    vh = scenario_values(params, spec, scen, intensity_params, strike, profile=c)
    fnodes = mg.to_nodes(density.expected_density)
    integrand = c * fnodes
    value = float(mg.weights @ integrand)
    base, adj = baseline_and_adjustment(params, spec, model, intensity_params, grid, strike, profile=c)
    band = (float(np.quantile(vh, 0.1)), float(np.quantile(vh, 0.9)))
    return EporValuation(value, base, adj, vh, band, integrand, mg.node_times, c, fnodes,
                         spec.initial_notional)


def write_valuation(val: EporValuation, out_dir, stem: str = "valuation") -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / f"{stem}.json").open("w") as fh:
        json.dump({k: round(v, 12) for k, v in val.report().items()}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with (out / f"{stem}_series.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["T", "C", "expected_density", "integrand"])
        for row in zip(val.node_times, val.swaption_values, val.expected_density, val.maturity_weights):
            w.writerow([f"{row[0]:.10g}"] + [f"{v:.12g}" for v in row[1:]])
