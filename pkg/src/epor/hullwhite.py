"""One-factor Hull-White model fitted to a discount curve.

The short rate is written r(t) = phi(t) + x(t) with dx = -a x dt + sigma dW,
x(t0) = 0, and phi chosen so that the model reproduces the curve. All bond
prices are expressed through the state x, so phi never has to be
differentiated from the interpolated curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .curve import DiscountCurve
from .parallel import chunk_generators, map_ordered

CHUNK_PATHS = 1 << 15


@dataclass(frozen=True)
class HullWhiteParams:
    mean_reversion: float
    volatility: float
    curve: DiscountCurve

    def __post_init__(self):
        if not self.mean_reversion > 0:
            raise ValueError("mean reversion must be positive")
        if not self.volatility >= 0:
            raise ValueError("volatility must be nonnegative")


def bond_b(a: float, t, s):
    return -np.expm1(-a * (np.asarray(s) - np.asarray(t))) / a


def _vfun(a: float, sigma: float, t, s):
    """Variance of the integral of x over [t, s] started from a deterministic state."""
    tau = np.asarray(s, dtype=float) - np.asarray(t, dtype=float)
    e1 = np.exp(-a * tau)
    return sigma**2 / a**2 * (tau + 2.0 / a * e1 - 0.5 / a * e1 * e1 - 1.5 / a)


def zcb_price(params: HullWhiteParams, t, s, x):
    """P(t, s) given the state x(t); broadcasts over t, s and x."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(s < t - 1e-14):
        raise ValueError("zcb_price requires s >= t")
    a, sig, c = params.mean_reversion, params.volatility, params.curve
    log_a = (c.log_df(s) - c.log_df(t)
             + 0.5 * (_vfun(a, sig, t, s) - _vfun(a, sig, 0.0, s) + _vfun(a, sig, 0.0, t)))
    return np.exp(log_a - bond_b(a, t, s) * np.asarray(x, dtype=float))


def state_variance(params: HullWhiteParams, t):
    a, sig = params.mean_reversion, params.volatility
    return sig**2 * -np.expm1(-2 * a * np.asarray(t, dtype=float)) / (2 * a)


def phi(params: HullWhiteParams, t):
    a, sig = params.mean_reversion, params.volatility
    t = np.asarray(t, dtype=float)
    return params.curve.forward_rate(t) + sig**2 / (2 * a**2) * (-np.expm1(-a * t)) ** 2


def phi_integral(params: HullWhiteParams, t):
    """Integral of phi over [t0, t], exact for the piecewise-flat forward curve."""
    a, sig = params.mean_reversion, params.volatility
    return -params.curve.log_df(t) + 0.5 * _vfun(a, sig, 0.0, t)


class HullWhiteState:
    """Bond-price source at time t for a (vector of) state(s) x."""

    def __init__(self, params: HullWhiteParams, t: float, x):
        self.params = params
        self.t = float(t)
        self.x = np.asarray(x, dtype=float)

    def discount(self, t, s):
        if not np.allclose(t, self.t):
            raise ValueError("state bond prices are only available at the state time")
        s = np.asarray(s, dtype=float)
        return zcb_price(self.params, self.t, s, self.x[..., None] if self.x.ndim else self.x)


def bond_option(params: HullWhiteParams, T, s, strike, call: bool):
    """Time-t0 price of a European option expiring at T on the bond maturing at s."""
    a, sig = params.mean_reversion, params.volatility
    T = np.asarray(T, dtype=float)
    s = np.asarray(s, dtype=float)
    p_t = params.curve.df(T)
    p_s = params.curve.df(s)
    sig_p = sig * np.sqrt(-np.expm1(-2 * a * T) / (2 * a)) * bond_b(a, T, s)
    strike = np.asarray(strike, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.log(p_s / (p_t * strike)) / sig_p + 0.5 * sig_p
    degenerate = sig_p <= 1e-14
    if call:
        price = p_s * ndtr(h) - strike * p_t * ndtr(h - sig_p)
        intrinsic = np.maximum(p_s - strike * p_t, 0.0)
    else:
        price = strike * p_t * ndtr(sig_p - h) - p_s * ndtr(-h)
        intrinsic = np.maximum(strike * p_t - p_s, 0.0)
    return np.where(degenerate, intrinsic, price)


@dataclass
class ShortRatePaths:
    grid: np.ndarray
    x: np.ndarray
    rate: np.ndarray
    integrated_rate: np.ndarray


def _validate_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("empty time grid")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return grid


def _simulate_x(params, grid, n, rng, x0):
    a, sig = params.mean_reversion, params.volatility
    dt = np.diff(grid)
    decay = np.exp(-a * dt)
    sd = sig * np.sqrt(-np.expm1(-2 * a * dt) / (2 * a))
    x = np.empty((n, grid.size))
    x[:, 0] = x0
    z = rng.standard_normal((n, dt.size))
    for k in range(dt.size):
        x[:, k + 1] = decay[k] * x[:, k] + sd[k] * z[:, k]
    return x


def simulate_short_rate(params: HullWhiteParams, grid, n_paths: int, seed: int,
                        x0: float = 0.0) -> ShortRatePaths:
    """Exact-transition paths of the state on `grid`.

    The integral of r is the exact integral of phi plus a trapezoid on x.
    Paths are produced in fixed-size chunks, chunk i drawing from the i-th
    child of SeedSequence(seed), so results do not depend on how the work is
    split. When the grid starts after t0, x0 is the state at grid[0].
    """
    grid = _validate_grid(grid)
    if n_paths <= 0:
        raise ValueError("n_paths must be positive")
    xs = map_ordered(lambda c: _simulate_x(params, grid, c[0], c[1], x0),
                     chunk_generators(seed, n_paths, CHUNK_PATHS))
    x = np.concatenate(xs, axis=0)
    dt = np.diff(grid)
    int_x = np.concatenate((np.zeros((n_paths, 1)),
                            np.cumsum(0.5 * (x[:, 1:] + x[:, :-1]) * dt, axis=1)), axis=1)
    int_phi = phi_integral(params, grid) - phi_integral(params, grid[0])
    rate = x + phi(params, grid)
    return ShortRatePaths(grid, x, rate, int_x + int_phi)
