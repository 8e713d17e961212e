"""Brute-force Monte Carlo of the prepayment option, independent of the quadrature engine.

Per path: a housing path on a time grid, a unit exponential E, the
relocation time tau where the cumulative hazard first reaches E (linear
interpolation of the trapezoid hazard between grid nodes), and, when
tau <= T*, the Hull-White state x(tau) together with the integral of x up
to tau drawn from their exact joint Gaussian law. The payoff is the
receiver swap value S(tau, K)^+ on the remaining schedule, discounted
pathwise.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .housing import HousingModel, _sample_chunk
from .hullwhite import HullWhiteParams, _vfun, state_variance, zcb_price
from .instruments import AmortizingSwapSpec
from .parallel import chunk_generators, map_ordered
from .relocation import IntensityParams, cumulative_hazard
from .valuation import make_grid

CHUNK_PATHS = 1 << 14
HAZARD_STEP_WARN = 0.2


@dataclass(frozen=True)
class OracleResult:
    strikes: np.ndarray
    price: np.ndarray
    std_err: np.ndarray
    n_paths: int
    notional: float

    @property
    def price_bps(self) -> np.ndarray:
        return self.price / self.notional * 1e4

    @property
    def se_bps(self) -> np.ndarray:
        return self.std_err / self.notional * 1e4

    def rows(self):
        return [(float(k), float(p), float(s), self.n_paths)
                for k, p, s in zip(self.strikes, self.price_bps, self.se_bps)]


@dataclass
class JointPaths:
    grid: np.ndarray
    h: np.ndarray
    exponential: np.ndarray
    tau: np.ndarray
    x_tau: np.ndarray
    int_x_tau: np.ndarray


def relocation_times(grid, cum_hazard, e) -> np.ndarray:
    """First t with cumulative hazard >= e by linear interpolation between nodes; inf if never."""
    m = cum_hazard.shape[0]
    k = np.sum(cum_hazard < e[:, None], axis=1)
    tau = np.full(m, np.inf)
    hit = k < grid.size
    ki = k[hit]
    rows = np.nonzero(hit)[0]
    lo = np.maximum(ki - 1, 0)
    c0, c1 = cum_hazard[rows, lo], cum_hazard[rows, ki]
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(c1 > c0, (e[rows] - c0) / (c1 - c0), 1.0)
    tau[rows] = np.where(ki == 0, grid[0], grid[lo] + frac * (grid[ki] - grid[lo]))
    return tau


def sample_state_and_integral(params: HullWhiteParams, t, rng):
    """Exact joint draw of x(t) and int_0^t x(s) ds, both started at 0."""
    a, sig = params.mean_reversion, params.volatility
    t = np.asarray(t, dtype=float)
    vx = state_variance(params, t)
    vi = _vfun(a, sig, 0.0, t)
    cxi = sig**2 / (2 * a * a) * np.expm1(-a * t) ** 2
    z1 = rng.standard_normal(t.shape)
    z2 = rng.standard_normal(t.shape)
    sx = np.sqrt(vx)
    x = sx * z1
    with np.errstate(invalid="ignore", divide="ignore"):
        beta = np.where(vx > 0, cxi / vx, 0.0)
    resid = np.sqrt(np.maximum(vi - beta * cxi, 0.0))
    return x, beta * x + resid * z2


def swap_at(params: HullWhiteParams, spec: AmortizingSwapSpec, t, x, strike):
    """Pathwise annuity, swap rate and receiver value at per-path times t and states x.

    Only payments strictly after t count; the floating leg restarts at t.
    """
    t = np.asarray(t, dtype=float)[:, None]
    dates = spec.payment_dates[None, :]
    live = dates > t
    p = np.where(live, zcb_price(params, t, np.maximum(dates, t), np.asarray(x)[:, None]), 0.0)
    first = live & ~np.concatenate((np.zeros((live.shape[0], 1), dtype=bool), live[:, :-1]), axis=1)
    prev = np.concatenate((np.zeros((p.shape[0], 1)), p[:, :-1]), axis=1)
    start = np.where(first, 1.0, prev)
    n = spec.notionals[None, :]
    a = np.sum(np.where(live, n * spec.accruals[None, :] * p, 0.0), axis=1)
    fl = np.sum(np.where(live, n * (start - p), 0.0), axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        kappa = np.where(a > 0, fl / np.where(a > 0, a, 1.0), np.nan)
    strike = np.asarray(strike, dtype=float)
    value = a[..., None] * strike - fl[..., None] if strike.ndim else a * strike - fl
    return a, kappa, value


def _paths_chunk(params, spec, model, intensity_params, grid, m, rng):
    h = _sample_chunk(model, grid, m, rng)
    cum = cumulative_hazard(intensity_params, grid, h)
    e = rng.standard_exponential(m)
    tau = relocation_times(grid, cum, e)
    inside = tau <= min(grid[-1], spec.end)
    x = np.zeros(m)
    ix = np.zeros(m)
    if inside.any():
        x[inside], ix[inside] = sample_state_and_integral(params, tau[inside], rng)
    return JointPaths(grid, h, e, tau, x, ix), float(np.max(np.diff(cum, axis=1), initial=0.0))


def _payoff_sums(params, spec, strikes, paths: JointPaths, t_star):
    inside = (paths.tau <= t_star) & (paths.tau < spec.end)
    k = strikes.size
    if not inside.any():
        return np.zeros(k), np.zeros(k)
    tau = paths.tau[inside]
    disc = params.curve.df(tau) * np.exp(-0.5 * _vfun(params.mean_reversion, params.volatility, 0.0, tau)
                                         - paths.int_x_tau[inside])
    _, _, value = swap_at(params, spec, tau, paths.x_tau[inside], strikes)
    pay = disc[:, None] * np.maximum(value, 0.0)
    return pay.sum(axis=0), (pay * pay).sum(axis=0)


def simulate_joint(params: HullWhiteParams, spec: AmortizingSwapSpec, model: HousingModel,
                   intensity_params: IntensityParams, n_paths: int, seed: int,
                   grid_step: float = 1.0 / 48.0) -> JointPaths:
    """All joint paths in memory; intended for diagnostics on moderate path counts."""
    grid = make_grid(model.t0, model.t_star, grid_step)
    parts = [_paths_chunk(params, spec, model, intensity_params, grid, m, rng)[0]
             for m, rng in chunk_generators(seed, n_paths, CHUNK_PATHS)]
    return JointPaths(grid, np.concatenate([p.h for p in parts]),
                      *(np.concatenate([getattr(p, f) for p in parts])
                        for f in ("exponential", "tau", "x_tau", "int_x_tau")))


def mc_price(params: HullWhiteParams, spec: AmortizingSwapSpec, model: HousingModel,
             intensity_params: IntensityParams, n_paths: int, seed: int, strikes=None,
             grid_step: float = 1.0 / 48.0, threads: int | None = None) -> OracleResult:
    """Monte Carlo price and standard error, one entry per strike on common paths.

    Chunk i of the paths uses child i of SeedSequence(seed) and the chunk
    sums are added in chunk order, so the result does not depend on the
    thread count.
    """
    if n_paths < 2:
        raise ValueError("need at least two paths")
    strikes = np.atleast_1d(np.asarray(spec.fixed_rate if strikes is None else strikes, dtype=float))
    grid = make_grid(model.t0, model.t_star, grid_step)
    t_star = grid[-1]

    def work(item):
        m, rng = item
        paths, step = _paths_chunk(params, spec, model, intensity_params, grid, m, rng)
        return _payoff_sums(params, spec, strikes, paths, t_star) + (step,)

    results = map_ordered(work, chunk_generators(seed, n_paths, CHUNK_PATHS), threads)
    s1 = np.zeros(strikes.size)
    s2 = np.zeros(strikes.size)
    worst = 0.0
    for a, b, step in results:
        s1 += a
        s2 += b
        worst = max(worst, step)
    if worst > HAZARD_STEP_WARN:
        warnings.warn(f"hazard increment {worst:.3f} per grid step exceeds {HAZARD_STEP_WARN}; "
                      "refine oracle.grid_step", RuntimeWarning, stacklevel=2)
    mean = s1 / n_paths
    var = np.maximum(s2 / n_paths - mean**2, 0.0) * n_paths / (n_paths - 1)
    return OracleResult(strikes, mean, np.sqrt(var / n_paths), n_paths, spec.initial_notional)


REGIONS = ("no_relocation", "before_relocation", "porting", "prepayment")


@dataclass
class ExposureDecomposition:
    probe_dates: np.ndarray
    tau: np.ndarray
    kappa_tau: np.ndarray
    S: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    region: np.ndarray

    def region_fractions(self) -> dict:
        return {name: (self.region == i).mean(axis=0) for i, name in enumerate(REGIONS)}


def _bridge(params, s, xs, u, xu, t, rng):
    """Draw x(t) given x(s) = xs and x(u) = xu (u may be inf for a free forward draw)."""
    a, sig = params.mean_reversion, params.volatility
    f1 = np.exp(-a * (t - s))
    v1 = sig**2 * -np.expm1(-2 * a * (t - s)) / (2 * a)
    z = rng.standard_normal(np.shape(t))
    free = ~np.isfinite(u)
    f2 = np.where(free, 0.0, np.exp(-a * np.where(free, 0.0, u - t)))
    v2 = np.where(free, 1.0, sig**2 * -np.expm1(-2 * a * np.where(free, 1.0, u - t)) / (2 * a))
    with np.errstate(invalid="ignore", divide="ignore"):
        prec = np.where(v1 > 0, 1.0 / v1, np.inf) + np.where(free, 0.0, f2**2 / np.where(v2 > 0, v2, np.inf))
        mean = np.where(v1 > 0, (f1 * xs / np.where(v1 > 0, v1, 1.0)
                                 + np.where(free, 0.0, f2 * np.nan_to_num(xu) / np.where(v2 > 0, v2, np.inf)))
                        / prec, f1 * xs)
        sd = np.where(np.isfinite(prec), 1.0 / np.sqrt(prec), 0.0)
    return mean + sd * z


def mc_exposure_decomposition(params: HullWhiteParams, spec: AmortizingSwapSpec, model: HousingModel,
                              intensity_params: IntensityParams, n_paths: int, seed: int, probe_dates,
                              strike=None, grid_step: float = 1.0 / 48.0) -> ExposureDecomposition:
    """Pathwise S, Y and Z = S - Y at probe dates and the region of each (path, date).

    Regions: 0 no relocation up to T*, 1 before relocation (T < tau <= T*),
    2 porting (tau <= T, kappa(tau) >= K), 3 prepayment (tau <= T, kappa(tau) < K).
    """
    K = spec.fixed_rate if strike is None else float(strike)
    probe = np.sort(np.asarray(probe_dates, dtype=float))
    t_star = min(model.t_star, spec.end)
    if probe.size == 0 or probe[0] < model.t0 or probe[-1] >= spec.end or probe[-1] > t_star:
        raise ValueError("probe dates must lie in [t0, T*] and before the last payment")
    grid = make_grid(model.t0, model.t_star, grid_step)
    ss_h, ss_r = np.random.SeedSequence(seed).spawn(2)
    rng_h = np.random.default_rng(ss_h)
    rng_r = np.random.default_rng(ss_r)
    h = _sample_chunk(model, grid, n_paths, rng_h)
    e = rng_h.standard_exponential(n_paths)
    tau = relocation_times(grid, cumulative_hazard(intensity_params, grid, h), e)

    a, sig = params.mean_reversion, params.volatility
    xp = np.empty((n_paths, probe.size))
    prev_t, prev_x = model.t0, np.zeros(n_paths)
    for j, t in enumerate(probe):
        dt = t - prev_t
        sd = sig * np.sqrt(-np.expm1(-2 * a * dt) / (2 * a))
        prev_x = np.exp(-a * dt) * prev_x + sd * rng_r.standard_normal(n_paths)
        xp[:, j] = prev_x
        prev_t = t

    reloc = tau <= t_star
    k = np.searchsorted(probe, tau, side="left")
    s_t = np.where(k > 0, probe[np.maximum(k - 1, 0)], model.t0)
    s_x = np.where(k > 0, xp[np.arange(n_paths), np.maximum(k - 1, 0)], 0.0)
    u_t = np.where(k < probe.size, probe[np.minimum(k, probe.size - 1)], np.inf)
    u_x = np.where(k < probe.size, xp[np.arange(n_paths), np.minimum(k, probe.size - 1)], np.nan)
    x_tau = np.zeros(n_paths)
    if reloc.any():
        x_tau[reloc] = _bridge(params, s_t[reloc], s_x[reloc], u_t[reloc], u_x[reloc], tau[reloc], rng_r)
    kappa = np.full(n_paths, np.nan)
    if reloc.any():
        _, kappa[reloc], _ = swap_at(params, spec, tau[reloc], x_tau[reloc], K)

    S = np.empty((n_paths, probe.size))
    Y = np.empty_like(S)
    region = np.empty(S.shape, dtype=np.int8)
    for j, t in enumerate(probe):
        ann, _, sk = swap_at(params, spec, np.full(n_paths, t), xp[:, j], K)
        S[:, j] = sk
        after = reloc & (tau <= t)
        prepay = after & (kappa < K)
        region[:, j] = np.where(~reloc, 0, np.where(~after, 1, np.where(prepay, 3, 2)))
        # S(T, kappa(tau)) = A(T) (kappa(tau) - kappa(T)) = S(T, K) - A(T) (K - kappa(tau))
        Y[:, j] = np.where(prepay, sk - ann * (K - np.nan_to_num(kappa)), sk)
    return ExposureDecomposition(probe, tau, kappa, S, Y, S - Y, region)
