"""Delta-Gamma hedging of the prepayment option with swaptions and swaps.

Mismatch norms are Euclidean (Delta) and Frobenius (Gamma), each divided by
the norm of the Greek being hedged, so objectives are unit free and the
weights k, k_vol and k_eig trade relative errors against each other.

Hedge instruments are receiver swaptions on the mortgage schedule at the
mortgage rate. Their Greeks at arbitrary maturities come from cubic splines
through the bump-and-reprice swaption profile on the maturity grid (one
spline per payment period, as the profile jumps at payment dates).
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar
from scipy.stats import qmc

from .curve import shift_quotes
from .greeks import BP, BumpSet, GreekProfile, greeks
from .housing import ScenarioSet
from .hullwhite import HullWhiteParams
from .instruments import AmortizingSwapSpec, calibrating_swap, swap_greeks_analytic, swap_value, swaption_prices
from .relocation import IntensityParams, RelocationDensityResult, density_paths
from .valuation import MaturityGrid, swaption_profile

__all__ = [
    "GreekProfile", "HedgeStrategy", "ShockReport", "EporContext", "greeks", "solve_global",
    "local_weight", "hedge_global", "hedge_fxr", "hedge_opr", "hedge_eigen", "hedge_cost",
    "shock_analysis", "shock_grid", "expected_shortfall", "range_volume",
]

MIN_RANGE = 0.05
# Weight of the relative Gamma mismatch against the relative Delta mismatch.
DEFAULT_K = 0.02


def expected_shortfall(x, alpha: float) -> float:
    """Mean of the worst ceil(alpha n) outcomes (at least one)."""
    x = np.sort(np.asarray(x, dtype=float).ravel())
    k = max(1, int(np.ceil(alpha * x.size - 1e-12)))
    return float(x[:k].mean())


def range_volume(bounds) -> float:
    """(1 - prod(l_j) / mean(l)^J)^J for range lengths l_j."""
    lengths = np.diff(np.asarray(bounds, dtype=float))
    j = lengths.size
    return float((1.0 - np.prod(lengths / lengths.mean())) ** j)


def _nsq(x, ref):
    r = float(np.sum(np.square(ref)))
    return float(np.sum(np.square(x))) / r if r > 0 else float(np.sum(np.square(x)))


def local_weight(ds, gs, dv, gv, k: float) -> float:
    """Scalar weight minimising the normalised local Delta-Gamma mismatch."""
    nd = float(np.sum(dv * dv)) or 1.0
    ng = float(np.sum(gv * gv)) or 1.0
    num = float(ds @ dv) / nd + k * float(np.sum(gs * gv)) / ng
    den = float(ds @ ds) / nd + k * float(np.sum(gs * gs)) / ng
    return num / den if den > 0 else 0.0


def local_objective(w, ds, gs, dv, gv, k: float) -> float:
    return _nsq(w * ds - dv, dv) + k * _nsq(w * gs - gv, gv)


def solve_global(delta_target, gamma_target, instrument_greeks, k: float = 1.0,
                 normalise: bool = True) -> np.ndarray:
    """Closed-form least squares for min ||sum w dS - dV||^2 + k ||sum w gS - gV||_F^2.

    With normalise, the two terms are divided by ||dV||^2 and ||gV||_F^2.
    """
    dv = np.asarray(delta_target, dtype=float)
    gv = np.asarray(gamma_target, dtype=float)
    d = np.array([g.delta for g in instrument_greeks]).T
    gm = np.array([g.gamma.ravel() for g in instrument_greeks]).T
    if not np.any(d) and not np.any(gm):
        raise ValueError("all instrument Greeks are zero")
    cd = 1.0 / (float(dv @ dv) or 1.0) if normalise else 1.0
    cg = 1.0 / (float(np.sum(gv * gv)) or 1.0) if normalise else 1.0
    gram = cd * d.T @ d + k * cg * gm.T @ gm
    rhs = cd * d.T @ dv + k * cg * gm.T @ gv.ravel()
    if np.linalg.cond(gram) > 1e12:
        gram = gram + 1e-12 * np.trace(gram) / gram.shape[0] * np.eye(gram.shape[0])
    return np.linalg.solve(gram, rhs)


@dataclass
class HedgeStrategy:
    kind: str
    bounds: np.ndarray
    maturities: np.ndarray
    weights: np.ndarray
    swap_weights: np.ndarray | None = None
    cost: float = 0.0
    objective: float = float("nan")
    diagnostics: dict = field(default_factory=dict)
    converged: bool = True

    @property
    def ranges(self):
        return list(zip(self.bounds[:-1], self.bounds[1:]))

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["range_lo", "range_hi", "maturity", "weight"])
            for (a, b), t, wt in zip(self.ranges, self.maturities, self.weights):
                w.writerow([f"{a:.10g}", f"{b:.10g}", f"{t:.10g}", f"{wt:.12g}"])

    def write_swaps_csv(self, path, curve) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["end_years", "notional"])
            sw = np.zeros(len(curve.quotes)) if self.swap_weights is None else self.swap_weights
            for q, u in zip(curve.quotes, sw):
                w.writerow([f"{q.end_date:.10g}", f"{u:.12g}"])


def read_strategy_csv(path, swaps_path=None, kind: str = "file") -> HedgeStrategy:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: empty strategy")
    lo = np.array([float(r["range_lo"]) for r in rows])
    hi = np.array([float(r["range_hi"]) for r in rows])
    bounds = np.append(lo, hi[-1])
    mats = np.array([float(r["maturity"]) for r in rows])
    wts = np.array([float(r["weight"]) for r in rows])
    sw = None
    if swaps_path is not None and Path(swaps_path).exists():
        with open(swaps_path, newline="") as fh:
            sw = np.array([float(r["notional"]) for r in csv.DictReader(fh)])
    return HedgeStrategy(kind, bounds, mats, wts, sw)


class EporContext:
    """Greeks of the prepayment option and of candidate swaptions, computed once.

    The swaption profile C(T) on the maturity grid is repriced on every curve
    of the bump stencil; option Greeks follow by linearity of the maturity
    integral. With scenarios, per-scenario densities are kept for the
    scenario-level Gamma targets and shock reports.
    """

    def __init__(self, params: HullWhiteParams, spec: AmortizingSwapSpec,
                 density: RelocationDensityResult, strike=None, bump: float = BP,
                 gamma_bump: float = 5 * BP, scenarios: ScenarioSet | None = None,
                 intensity_params: IntensityParams | None = None):
        self.params = params
        self.spec = spec
        self.strike = spec.fixed_rate if strike is None else float(strike)
        self.grid = MaturityGrid.build(density.grid, spec)
        self.t0 = float(density.grid[0])
        self.t_star = float(density.grid[-1])
        self.bumps = BumpSet.build(params.curve, bump, gamma_bump)
        self._pricer = lambda curve: swaption_profile(replace(params, curve=curve), spec, self.grid,
                                                      self.strike)
        self.c, self.c_delta, self.c_gamma = self.bumps.apply(self._pricer)
        self.fbar = self.grid.to_nodes(density.expected_density)
        self.weights = self.grid.weights
        self.n_quotes = len(params.curve.quotes)
        self._build_splines()
        self.f_scen = None
        if scenarios is not None:
            if intensity_params is None:
                raise ValueError("per-scenario densities need the intensity parameters")
            f, _ = density_paths(intensity_params, scenarios.grid, scenarios.values)
            self.f_scen = self.grid.to_nodes(f)

    def _build_splines(self):
        n = self.n_quotes
        data = np.concatenate((self.c[:, None], self.c_delta.T,
                               self.c_gamma.reshape(n * n, -1).T), axis=1)
        t = self.grid.node_times
        self._seg_start = []
        self._splines = []
        for lo, hi in self.grid.seg_bounds:
            x = t[lo:hi]
            kind = "not-a-knot" if x.size >= 4 else "natural"
            self._splines.append(CubicSpline(x, data[lo:hi], axis=0, bc_type=kind))
            self._seg_start.append(x[0])
        self._seg_start = np.array(self._seg_start)

    def instruments(self, maturities):
        """Values (m,), Delta (m, I) and Gamma (m, I, I) of swaptions maturing at T."""
        t = np.atleast_1d(np.asarray(maturities, dtype=float))
        n = self.n_quotes
        out = np.empty((t.size, 1 + n + n * n))
        seg = np.clip(np.searchsorted(self._seg_start, t, side="right") - 1, 0, len(self._splines) - 1)
        for s in np.unique(seg):
            m = seg == s
            out[m] = self._splines[s](t[m])
        g = out[:, 1 + n:].reshape(-1, n, n)
        return out[:, 0], out[:, 1:1 + n], 0.5 * (g + np.swapaxes(g, 1, 2))

    def instrument_greeks(self, maturity: float) -> GreekProfile:
        _, d, g = self.instruments([maturity])
        return GreekProfile(d[0], g[0])

    def swaption_values(self, maturities, params=None) -> np.ndarray:
        p = self.params if params is None else params
        return swaption_prices(p, self.spec, np.atleast_1d(maturities), self.strike)

    def range_node_weights(self, a: float, b: float) -> np.ndarray:
        return self.grid.range_weights(a, b)

    def range_greeks(self, a: float, b: float):
        rw = self.range_node_weights(a, b) * self.fbar
        return float(rw @ self.c), self.c_delta @ rw, self.c_gamma @ rw

    def total_greeks(self):
        return self.range_greeks(self.t0, self.t_star)

    def scenario_range_gammas(self, a: float, b: float) -> np.ndarray:
        if self.f_scen is None:
            raise ValueError("context was built without scenarios")
        rw = self.range_node_weights(a, b)
        return np.einsum("m,nm,ijm->nij", rw, self.f_scen, self.c_gamma)

    def value(self) -> float:
        return float(self.weights @ (self.c * self.fbar))

    def bps(self, v):
        return np.asarray(v) / self.spec.initial_notional * 1e4


def _range_mass(ctx: EporContext, a, b) -> float:
    return float(ctx.range_node_weights(a, b) @ ctx.fbar)


def _local_fit(ctx: EporContext, a, b, t, k):
    _, dv, gv = ctx.range_greeks(a, b)
    _, ds, gs = ctx.instruments([t])
    w = local_weight(ds[0], gs[0], dv, gv, k)
    return w, local_objective(w, ds[0], gs[0], dv, gv, k)


def _valid_maturity(ctx, t):
    return min(t, ctx.spec.end - 1e-6)


def _best_maturity(ctx: EporContext, a: float, b: float, k: float):
    """Golden-section search seeded by a 16-point scan; the midpoint is always a candidate."""
    hi_t = _valid_maturity(ctx, b - 1e-9)
    h = (hi_t - a) / 16
    xs = a + h * (np.arange(16) + 0.5)
    f = lambda t: _local_fit(ctx, a, b, float(np.clip(t, a, hi_t)), k)[1]
    vals = np.array([f(x) for x in xs])
    i = int(np.argmin(vals))
    cands = [(vals[i], xs[i])]
    lo, hi = max(a, xs[i] - h), min(hi_t, xs[i] + h)
    if f(lo) > vals[i] and f(hi) > vals[i]:
        res = minimize_scalar(f, bracket=(lo, xs[i], hi), method="golden", options={"xtol": 1e-10})
        if a <= res.x <= hi_t:
            cands.append((res.fun, float(res.x)))
    else:
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
        cands.append((res.fun, float(res.x)))
    mid = 0.5 * (a + b)
    cands.append((f(mid), mid))
    best = min(cands, key=lambda c: c[0])
    return best[1], best[0]


def _finish(ctx: EporContext, kind, bounds, mats, weights, k, swap_weights=None, **diag):
    _, dv, gv = ctx.total_greeks()
    _, ds, gs = ctx.instruments(mats)
    zd = weights @ ds - dv
    zg = np.tensordot(weights, gs, axes=1) - gv
    if swap_weights is not None:
        sd, sg = _swap_greeks(ctx)
        zd = zd + swap_weights @ sd
        zg = zg + np.tensordot(swap_weights, sg, axes=1)
    objective = _nsq(zd, dv) + k * _nsq(zg, gv)
    strat = HedgeStrategy(kind, np.asarray(bounds, dtype=float), np.asarray(mats, dtype=float),
                          np.asarray(weights, dtype=float), swap_weights, 0.0, objective, dict(diag))
    strat.diagnostics.update(delta_residual=zd, gamma_residual=zg)
    strat.cost = hedge_cost(strat, ctx)
    return strat


def equal_bounds(ctx: EporContext, J: int) -> np.ndarray:
    return np.linspace(ctx.t0, ctx.t_star, J + 1)


def hedge_fxr(ctx: EporContext, J: int, maturity_rule: str = "midpoint", k_j: float = DEFAULT_K,
              bounds=None) -> HedgeStrategy:
    """One swaption per fixed range, weight from the local closed form."""
    if J < 1:
        raise ValueError("J must be at least 1")
    bounds = equal_bounds(ctx, J) if bounds is None else np.asarray(bounds, dtype=float)
    mats, weights, objs, empty = [], [], [], []
    for j, (a, b) in enumerate(zip(bounds[:-1], bounds[1:])):
        if maturity_rule == "midpoint":
            t = 0.5 * (a + b)
            w, obj = _local_fit(ctx, a, b, t, k_j)
        elif maturity_rule == "optimal":
            t, obj = _best_maturity(ctx, a, b, k_j)
            w, obj = _local_fit(ctx, a, b, t, k_j)
        else:
            raise ValueError(f"unknown maturity rule {maturity_rule!r}")
        if _range_mass(ctx, a, b) <= 1e-14:
            w, empty = 0.0, empty + [j]
        mats.append(t)
        weights.append(w)
        objs.append(obj)
    kind = "fxr_mim" if maturity_rule == "midpoint" else "fxr_opm"
    return _finish(ctx, kind, bounds, mats, np.array(weights), k_j, local_objectives=np.array(objs),
                   empty_ranges=empty)


def hedge_global(ctx: EporContext, maturities, k: float = DEFAULT_K, bounds=None) -> HedgeStrategy:
    mats = np.asarray(maturities, dtype=float)
    _, dv, gv = ctx.total_greeks()
    _, ds, gs = ctx.instruments(mats)
    w = solve_global(dv, gv, [GreekProfile(d, g) for d, g in zip(ds, gs)], k)
    if bounds is None:
        bounds = np.concatenate(([ctx.t0], 0.5 * (mats[1:] + mats[:-1]), [ctx.t_star]))
    return _finish(ctx, "global", bounds, mats, w, k)


def opr_objective(ctx: EporContext, bounds, k: float, k_vol: float) -> float:
    bounds = np.asarray(bounds, dtype=float)
    mats = 0.5 * (bounds[1:] + bounds[:-1])
    _, dv, gv = ctx.total_greeks()
    _, ds, gs = ctx.instruments(mats)
    w = np.empty(mats.size)
    for j, (a, b) in enumerate(zip(bounds[:-1], bounds[1:])):
        _, dvj, gvj = ctx.range_greeks(a, b)
        w[j] = local_weight(ds[j], gs[j], dvj, gvj, k)
    zd = w @ ds - dv
    zg = np.tensordot(w, gs, axes=1) - gv
    return _nsq(zd, dv) + k * _nsq(zg, gv) + k_vol * range_volume(bounds)


def hedge_opr(ctx: EporContext, J: int, k: float = DEFAULT_K, k_vol: float = 0.1, restarts: int = 8,
              seed: int = 0, max_sweeps: int = 30, tol: float = 1e-10) -> HedgeStrategy:
    """Optimal ranges with midpoint maturities.

    Coordinate descent over the interior knots, each knot minimised by a
    bounded scalar search between its neighbours; restarted from scrambled
    Sobol partitions plus the equal partition.
    """
    if J < 2:
        raise ValueError("optimal ranges need J >= 2")
    t0, t1 = ctx.t0, ctx.t_star
    gap = min(MIN_RANGE, (t1 - t0) / (4 * J))
    starts = [equal_bounds(ctx, J)[1:-1]]
    sob = qmc.Sobol(d=J - 1, scramble=True, seed=seed).random(restarts)
    for u in sob:
        x = np.sort(u)
        # keep every start feasible: map to lengths with the minimum gap
        lengths = np.diff(np.concatenate(([0.0], x, [1.0])))
        lengths = gap + lengths * (t1 - t0 - J * gap)
        starts.append(t0 + np.cumsum(lengths)[:-1])
    obj = lambda knots: opr_objective(ctx, np.concatenate(([t0], knots, [t1])), k, k_vol)
    best_knots, best_val, all_converged = None, np.inf, True
    for knots in starts:
        knots = np.array(knots, dtype=float)
        val = obj(knots)
        converged = False
        for _ in range(max_sweeps):
            prev = val
            for i in range(J - 1):
                lo = (knots[i - 1] if i > 0 else t0) + gap
                hi = (knots[i + 1] if i < J - 2 else t1) - gap
                if hi <= lo:
                    continue

                def f1(x, i=i):
                    trial = knots.copy()
                    trial[i] = x
                    return obj(trial)

                res = minimize_scalar(f1, bounds=(lo, hi), method="bounded", options={"xatol": 1e-9})
                if res.fun < val:
                    knots[i], val = res.x, res.fun
            if prev - val <= tol * max(1.0, abs(prev)):
                converged = True
                break
        all_converged &= converged
        if val < best_val:
            best_knots, best_val = knots.copy(), val
    bounds = np.concatenate(([t0], best_knots, [t1]))
    mats = 0.5 * (bounds[1:] + bounds[:-1])
    weights = np.array([_local_fit(ctx, a, b, t, k)[0]
                        for a, b, t in zip(bounds[:-1], bounds[1:], mats)])
    strat = _finish(ctx, "opr_mim", bounds, mats, weights, k, volume=range_volume(bounds))
    strat.objective = best_val
    strat.converged = all_converged
    return strat


def global_objective(ctx: EporContext, strategy: HedgeStrategy, k: float = DEFAULT_K,
                     k_vol: float = 0.0) -> float:
    """Normalised total Delta-Gamma mismatch of a strategy plus the optional range-volume penalty."""
    base = _finish(ctx, strategy.kind, strategy.bounds, strategy.maturities, strategy.weights, k,
                   swap_weights=strategy.swap_weights)
    return base.objective + k_vol * range_volume(strategy.bounds)


def _swap_greeks(ctx: EporContext):
    if not hasattr(ctx, "_swap_g"):
        curve = ctx.params.curve
        gs = [swap_greeks_analytic(curve, calibrating_swap(curve, i)) for i in range(ctx.n_quotes)]
        ctx._swap_g = (np.array([g.delta for g in gs]), np.array([g.gamma for g in gs]))
    return ctx._swap_g


def _eigen_term(w, gs, gvh, alpha):
    lam = np.linalg.eigvalsh(w * gs[None] - gvh)[:, 0]
    return expected_shortfall(lam, alpha)


def hedge_eigen(ctx: EporContext, base: HedgeStrategy | None = None, J: int = 6, k_j: float = DEFAULT_K,
                k_eig: float = 1.0, alpha: float = 0.1, k_vol: float = 0.1, seed: int = 0) -> HedgeStrategy:
    """Concavity-penalised local weights on the ranges of `base` plus calibrating-swap Delta correction.

    The per-range objective adds -k_eig ES_alpha[min eigenvalue of the
    scenario Gamma mismatch] / ||Gamma(V_j)||_F to the local objective. It is
    convex in w (the minimum eigenvalue of an affine matrix pencil is
    concave), so a bounded scalar search on [0, 3 w_local] suffices; the
    bracket is widened if the minimiser sits on its upper end.
    """
    if ctx.f_scen is None:
        raise ValueError("eigen hedge needs a context built with scenarios")
    if base is None:
        base = hedge_opr(ctx, J, k_j, k_vol, seed=seed)
    bounds, mats = base.bounds, base.maturities
    _, ds, gs = ctx.instruments(mats)
    weights, widened = [], []
    for j, (a, b) in enumerate(zip(bounds[:-1], bounds[1:])):
        _, dv, gv = ctx.range_greeks(a, b)
        w0 = local_weight(ds[j], gs[j], dv, gv, k_j)
        if k_eig == 0 or w0 <= 0:
            weights.append(w0)
            continue
        gvh = ctx.scenario_range_gammas(a, b)
        scale = np.sqrt(np.sum(gv * gv)) or 1.0

        def f(w):
            return (local_objective(w, ds[j], gs[j], dv, gv, k_j)
                    - k_eig * _eigen_term(w, gs[j], gvh, alpha) / scale)

        upper = 3.0 * w0
        for _ in range(6):
            res = minimize_scalar(f, bounds=(0.0, upper), method="bounded",
                                  options={"xatol": 1e-12 * max(w0, 1e-12)})
            if res.x < upper * (1 - 1e-6):
                break
            widened.append(j)
            upper *= 2.0
        weights.append(float(res.x))
    weights = np.array(weights)
    _, dv, gv = ctx.total_greeks()
    resid = dv - weights @ ds
    sd, _ = _swap_greeks(ctx)
    u = np.linalg.solve(sd.T, resid)
    return _finish(ctx, "eigen", bounds, mats, weights, k_j, swap_weights=u, widened=widened,
                   k_eig=k_eig, alpha=alpha)


def hedge_cost(strategy: HedgeStrategy, ctx_or_params) -> float:
    """Price of the swaptions plus the calibrating-swap correction (swaps at par cost 0)."""
    if strategy.weights.size == 0:
        return 0.0
    if isinstance(ctx_or_params, EporContext):
        ctx = ctx_or_params
        cost = float(strategy.weights @ ctx.swaption_values(strategy.maturities))
        curve = ctx.params.curve
    else:
        raise TypeError("hedge_cost needs an EporContext")
    if strategy.swap_weights is not None:
        for i, u in enumerate(strategy.swap_weights):
            cost += u * float(swap_value(curve, calibrating_swap(curve, i), 0.0))
    return cost


@dataclass
class ShockReport:
    shock_grid: np.ndarray
    distributions: np.ndarray
    es_1pct: np.ndarray
    prob_loss: np.ndarray
    notional: float
    alpha: float = 0.01

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["shock_vector", "es_1pct", "prob_loss"])
            for s, es, p in zip(self.shock_grid, self.es_1pct, self.prob_loss):
                vec = "[" + " ".join(f"{v:g}" for v in s) + "]"
                w.writerow([vec, f"{es / self.notional * 1e4:.10g}", f"{p:.10g}"])

    def mean_abs(self) -> np.ndarray:
        return np.abs(self.distributions).mean(axis=1)


def shock_grid(n_quotes: int, levels=(-25.0, 0.0, 25.0), single_sizes=(50.0,)) -> np.ndarray:
    """All level combinations except the zero vector, then +/- single-quote shocks (bp)."""
    rows = [np.array(c) for c in itertools.product(levels, repeat=n_quotes) if any(c)]
    for s in single_sizes:
        for i in range(n_quotes):
            for sign in (1.0, -1.0):
                v = np.zeros(n_quotes)
                v[i] = sign * s
                if not any(np.array_equal(v, r) for r in rows):
                    rows.append(v)
    return np.array(rows, dtype=float)


def shock_analysis(strategy: HedgeStrategy, ctx: EporContext, shocks, alpha: float = 0.01) -> ShockReport:
    """Change of (hedge - option) per scenario for each parallel-or-not quote shock in bp."""
    if ctx.f_scen is None:
        raise ValueError("shock analysis needs a context built with scenarios")
    shocks = np.atleast_2d(np.asarray(shocks, dtype=float))
    curve = ctx.params.curve
    w_nodes = ctx.weights

    def position(params):
        c = swaption_profile(params, ctx.spec, ctx.grid, ctx.strike)
        vh = ctx.f_scen @ (w_nodes * c)
        hedge = float(strategy.weights @ ctx.swaption_values(strategy.maturities, params))
        if strategy.swap_weights is not None:
            for i, u in enumerate(strategy.swap_weights):
                hedge += u * float(swap_value(params.curve, calibrating_swap(curve, i), 0.0))
        return hedge - vh

    base = position(ctx.params)
    dist = np.empty((shocks.shape[0], base.size))
    for r, s in enumerate(shocks):
        shocked = replace(ctx.params, curve=shift_quotes(curve, s * BP))
        dist[r] = position(shocked) - base
    es = np.array([expected_shortfall(d, alpha) for d in dist])
    pl = (dist < 0).mean(axis=1)
    return ShockReport(shocks, dist, es, pl, ctx.spec.initial_notional, alpha)
