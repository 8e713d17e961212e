"""Bump-and-reprice sensitivities with respect to the calibrating par quotes."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .curve import DiscountCurve, shift_quotes

BP = 1e-4


@dataclass(frozen=True)
class GreekProfile:
    delta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        d = np.atleast_1d(np.asarray(self.delta, dtype=float))
        g = np.atleast_2d(np.asarray(self.gamma, dtype=float))
        if g.shape != (d.size, d.size):
            raise ValueError("gamma must be I x I with I = len(delta)")
        object.__setattr__(self, "delta", d)
        object.__setattr__(self, "gamma", 0.5 * (g + g.T))

    def __add__(self, other):
        return GreekProfile(self.delta + other.delta, self.gamma + other.gamma)

    def __sub__(self, other):
        return GreekProfile(self.delta - other.delta, self.gamma - other.gamma)

    def scaled(self, w: float):
        return GreekProfile(w * self.delta, w * self.gamma)


@dataclass(frozen=True)
class BumpSet:
    """The shifted curves a central-difference Delta/Gamma stencil needs.

    Keys are tuples of per-quote shifts in units of the bump size.
    """

    base: DiscountCurve
    delta_bump: float
    gamma_bump: float
    curves: dict

    @classmethod
    def build(cls, curve: DiscountCurve, delta_bump: float = BP, gamma_bump: float = 5 * BP):
        n = len(curve.quotes)
        curves = {}
        for i in range(n):
            for s in (+1, -1):
                for tag, h in (("d", delta_bump), ("g", gamma_bump)):
                    shift = np.zeros(n)
                    shift[i] = s * h
                    curves[(tag, i, s)] = shift_quotes(curve, shift)
        for i, j in combinations(range(n), 2):
            for si in (+1, -1):
                for sj in (+1, -1):
                    shift = np.zeros(n)
                    shift[i] = si * gamma_bump
                    shift[j] = sj * gamma_bump
                    curves[("x", i, j, si, sj)] = shift_quotes(curve, shift)
        return cls(curve, delta_bump, gamma_bump, curves)

    @property
    def n_quotes(self) -> int:
        return len(self.base.quotes)

    def apply(self, pricer, base_value=None):
        """Evaluate `pricer(curve)` on every stencil curve.

        The pricer may return an array; Greeks then carry the array shape as
        trailing axes: delta (I, ...), gamma (I, I, ...).
        """
        v0 = np.asarray(pricer(self.base) if base_value is None else base_value, dtype=float)
        n = self.n_quotes
        vals = {k: np.asarray(pricer(c), dtype=float) for k, c in self.curves.items()}
        delta = np.empty((n,) + v0.shape)
        gamma = np.empty((n, n) + v0.shape)
        hd, hg = self.delta_bump, self.gamma_bump
        for i in range(n):
            delta[i] = (vals[("d", i, 1)] - vals[("d", i, -1)]) / (2 * hd)
            gamma[i, i] = (vals[("g", i, 1)] - 2 * v0 + vals[("g", i, -1)]) / hg**2
        for i, j in combinations(range(n), 2):
            g = (vals[("x", i, j, 1, 1)] - vals[("x", i, j, 1, -1)]
                 - vals[("x", i, j, -1, 1)] + vals[("x", i, j, -1, -1)]) / (4 * hg**2)
            gamma[i, j] = g
            gamma[j, i] = g
        return v0, delta, gamma


def greeks(pricer, curve: DiscountCurve, bump: float = BP, gamma_bump: float = 5 * BP) -> GreekProfile:
    """Delta by central differences, Gamma by central second and four-point cross differences."""
    _, d, g = BumpSet.build(curve, bump, gamma_bump).apply(lambda c: float(pricer(c)))
    return GreekProfile(d, g)


def discount_sensitivities(curve: DiscountCurve, dates, h: float = 1e-4):
    """First and second quote-derivatives of P(t0; dates).

    First derivatives use a Richardson-extrapolated central difference
    (fourth order in h); second derivatives a plain central stencil.
    """
    dates = np.asarray(dates, dtype=float)
    n = len(curve.quotes)
    p0 = curve.df(dates)
    dp = np.empty((n,) + dates.shape)
    d2p = np.empty((n, n) + dates.shape)

    def shifted(i_s):
        shift = np.zeros(n)
        for i, s in i_s:
            shift[i] += s
        return shift_quotes(curve, shift).df(dates)

    plus, minus = {}, {}
    for i in range(n):
        plus[i] = shifted([(i, h)])
        minus[i] = shifted([(i, -h)])
        d_h = (plus[i] - minus[i]) / (2 * h)
        d_h2 = (shifted([(i, h / 2)]) - shifted([(i, -h / 2)])) / h
        dp[i] = (4 * d_h2 - d_h) / 3
        d2p[i, i] = (plus[i] - 2 * p0 + minus[i]) / h**2
    for i, j in combinations(range(n), 2):
        g = (shifted([(i, h), (j, h)]) - shifted([(i, h), (j, -h)])
             - shifted([(i, -h), (j, h)]) + shifted([(i, -h), (j, -h)])) / (4 * h**2)
        d2p[i, j] = g
        d2p[j, i] = g
    return p0, dp, d2p
