"""Amortizing swaps and European swaptions under one-factor Hull-White.

Schedules store the notional outstanding over each accrual period: the
period ending at payment date t_j accrues on N(t_{j-1}), and the loan is
fully redeemed at t_n. When a valuation time T falls inside a period, the
floating leg of that period is taken to reset at T (P(T;T)=1), which is the
same as the current notional being prepaid at par at T.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .curve import DiscountCurve
from .greeks import GreekProfile, discount_sensitivities
from .hullwhite import HullWhiteParams, bond_b, bond_option, zcb_price

_EPS_T = 1e-10


@dataclass(frozen=True)
class AmortizingSwapSpec:
    payment_dates: np.ndarray
    notionals: np.ndarray
    fixed_rate: float
    kind: str = "custom"
    start: float = 0.0

    def __post_init__(self):
        dates = np.asarray(self.payment_dates, dtype=float)
        n = np.asarray(self.notionals, dtype=float)
        if dates.ndim != 1 or dates.size == 0 or dates.shape != n.shape:
            raise ValueError("need one period notional per payment date")
        if dates[0] <= self.start or np.any(np.diff(dates) <= 0):
            raise ValueError("payment dates must be strictly increasing and after start")
        if np.any(n < 0):
            raise ValueError("notionals must be nonnegative")
        if self.kind == "bullet" and not np.all(n == n[0]):
            raise ValueError("bullet schedule must have constant notional")
        if self.kind not in ("bullet", "linear", "custom"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        dates.setflags(write=False)
        n.setflags(write=False)
        object.__setattr__(self, "payment_dates", dates)
        object.__setattr__(self, "notionals", n)

    @classmethod
    def bullet(cls, end_years: float, frequency: int, fixed_rate: float, notional: float = 10000.0):
        dates = np.arange(1, int(round(end_years * frequency)) + 1) / frequency
        return cls(dates, np.full(dates.size, float(notional)), fixed_rate, "bullet")

    @classmethod
    def linear(cls, end_years: float, frequency: int, fixed_rate: float, notional: float = 10000.0):
        n = int(round(end_years * frequency))
        dates = np.arange(1, n + 1) / frequency
        return cls(dates, notional * (n - np.arange(n)) / n, fixed_rate, "linear")

    @classmethod
    def build(cls, kind: str, end_years: float, frequency: int, fixed_rate: float,
              notional: float = 10000.0):
        if kind == "bullet":
            return cls.bullet(end_years, frequency, fixed_rate, notional)
        if kind == "linear":
            return cls.linear(end_years, frequency, fixed_rate, notional)
        raise ValueError(f"schedule kind {kind!r} needs an explicit schedule")

    @property
    def end(self) -> float:
        return float(self.payment_dates[-1])

    @property
    def initial_notional(self) -> float:
        return float(self.notionals[0])

    @property
    def accruals(self) -> np.ndarray:
        return np.diff(np.concatenate(([self.start], self.payment_dates)))

    def outstanding(self, t) -> np.ndarray:
        """Notional outstanding at t (the period notional of the period containing t)."""
        idx = np.searchsorted(self.payment_dates, np.asarray(t, dtype=float), side="right")
        return np.where(idx < self.notionals.size,
                        self.notionals[np.minimum(idx, self.notionals.size - 1)], 0.0)

    def coefficients(self, strike=None) -> np.ndarray:
        """Cash flow per payment date: coupon plus scheduled redemption."""
        k = self.fixed_rate if strike is None else strike
        nxt = np.append(self.notionals[1:], 0.0)
        return k * self.notionals * self.accruals + self.notionals - nxt

    def with_rate(self, fixed_rate: float):
        return AmortizingSwapSpec(self.payment_dates, self.notionals, fixed_rate, self.kind, self.start)


@dataclass(frozen=True)
class SwaptionSpec:
    maturity: float
    underlying: AmortizingSwapSpec

    def __post_init__(self):
        if not self.underlying.start <= self.maturity < self.underlying.end:
            raise ValueError("swaption maturity must lie in [start, last payment date)")


def read_schedule_csv(path, fixed_rate: float) -> AmortizingSwapSpec:
    """Rows `date,notional`: the first row is the start date with the initial
    notional, later rows give the notional outstanding after each payment."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if len(rows) < 2:
        raise ValueError(f"{path}: need a start row and at least one payment row")
    dates = np.array([float(r["date"]) for r in rows])
    notional = np.array([float(r["notional"]) for r in rows])
    if notional[-1] != 0.0:
        raise ValueError(f"{path}: final notional must be zero (loan redeemed at maturity)")
    kind = "bullet" if np.all(notional[:-1] == notional[0]) else "custom"
    return AmortizingSwapSpec(dates[1:], notional[:-1], fixed_rate, kind, float(dates[0]))


def _active(spec: AmortizingSwapSpec, T: float, left_limit: bool = False):
    if left_limit:
        return spec.payment_dates >= T - _EPS_T
    return spec.payment_dates > T + _EPS_T


def _legs(source, spec: AmortizingSwapSpec, T: float, left_limit: bool = False):
    """Annuity and floating-leg value at T for a curve or a (vector) HW state."""
    mask = _active(spec, T, left_limit)
    if not mask.any():
        raise ValueError("no payments remain after T")
    dates = spec.payment_dates[mask]
    n = spec.notionals[mask]
    acc = spec.accruals[mask]
    p = np.asarray(source.discount(T, dates))
    start_bonds = np.concatenate((np.ones(p.shape[:-1] + (1,)), p[..., :-1]), axis=-1)
    annuity = np.sum(n * acc * p, axis=-1)
    floating = np.sum(n * (start_bonds - p), axis=-1)
    return annuity, floating


def annuity(source, spec: AmortizingSwapSpec, T: float = 0.0, left_limit: bool = False):
    return _legs(source, spec, T, left_limit)[0]


def swap_rate(source, spec: AmortizingSwapSpec, T: float = 0.0, left_limit: bool = False):
    a, fl = _legs(source, spec, T, left_limit)
    if np.any(a <= 0):
        raise ZeroDivisionError("zero annuity")
    return fl / a


def swap_value(source, spec: AmortizingSwapSpec, T: float = 0.0, strike=None, left_limit: bool = False):
    """Receiver value A(T)(K - kappa(T))."""
    k = spec.fixed_rate if strike is None else strike
    a, fl = _legs(source, spec, T, left_limit)
    if np.any(a <= 0):
        raise ZeroDivisionError("zero annuity")
    return a * (k - fl / a)


def _jamshidian_roots(coef, a0, b, target, tol):
    """Solve sum_j coef_j a0_j exp(-b_j x) = target row-wise (decreasing, convex in x)."""
    m = target.size
    x = np.zeros(m)
    lo = np.full(m, -np.inf)
    hi = np.full(m, np.inf)
    for _ in range(100):
        e = coef * a0 * np.exp(-b * x[:, None])
        f = e.sum(axis=1) - target
        if np.all(np.abs(f) <= tol):
            return x
        lo = np.where(f > 0, np.maximum(lo, x), lo)
        hi = np.where(f < 0, np.minimum(hi, x), hi)
        fp = -(b * e).sum(axis=1)
        step = np.where(fp < 0, f / np.where(fp < 0, fp, -1.0), np.nan)
        xn = x - step
        bad = ~np.isfinite(xn) | (xn <= lo) | (xn >= hi)
        with np.errstate(invalid="ignore"):
            mid = np.where(np.isfinite(lo) & np.isfinite(hi), 0.5 * (lo + hi),
                           np.where(np.isfinite(lo), lo + 1.0, hi - 1.0))
        x = np.where(np.abs(f) <= tol, x, np.where(bad, mid, xn))
    e = coef * a0 * np.exp(-b * x[:, None])
    f = e.sum(axis=1) - target
    if np.any(np.abs(f) > tol):
        raise RuntimeError("critical-state root not bracketed; schedule coefficients not positive?")
    return x


def swaption_prices(params: HullWhiteParams, spec: AmortizingSwapSpec, maturities, strike=None,
                    payer: bool = False, left_limit: bool = False) -> np.ndarray:
    """Time-t0 prices of European swaptions on `spec` for a vector of maturities.

    With left_limit the payment falling exactly on T still belongs to the
    underlying (the value just before the payment date).
    """
    T = np.atleast_1d(np.asarray(maturities, dtype=float))
    dates = spec.payment_dates
    coef = spec.coefficients(strike)
    if np.any(coef < 0):
        raise ValueError("negative cash-flow coefficient: schedule must be nonincreasing")
    if left_limit:
        mask = dates[None, :] >= T[:, None] - _EPS_T
    else:
        mask = dates[None, :] > T[:, None] + _EPS_T
    alive = mask.any(axis=1)
    first = np.argmax(mask, axis=1)
    n_prepay = np.where(alive, spec.notionals[first], 0.0)

    a = params.mean_reversion
    dd = np.maximum(dates[None, :], T[:, None])
    bmat = np.where(mask, bond_b(a, T[:, None], dd), 0.0)
    a0 = np.where(mask, zcb_price(params, T[:, None], dd, 0.0), 0.0)
    cm = np.where(mask, coef[None, :], 0.0)
    # cash flows paid exactly at T are deterministic
    sure = mask & (bmat <= 1e-14)
    target = n_prepay - (cm * a0 * sure).sum(axis=1)
    risky = mask & ~sure
    cr = np.where(risky, cm, 0.0)
    p0t = params.curve.df(T)
    p0s = params.curve.df(dd)

    out = np.zeros(T.size)
    has_risky = risky.any(axis=1) & alive
    solve = has_risky & (target > 0)
    sign = -1.0 if payer else 1.0
    # without a root the payoff sign is fixed, so the option is worth its forward value or zero
    fwd = ((cm * p0s).sum(axis=1) - n_prepay * p0t)
    sure_only = alive & ~solve
    out[sure_only] = np.maximum(sign * fwd[sure_only], 0.0)
    if solve.any():
        idx = np.nonzero(solve)[0]
        tol = 1e-12 * max(spec.initial_notional, 1.0)
        xs = _jamshidian_roots(cr[idx], a0[idx], bmat[idx], target[idx], tol)
        strikes = a0[idx] * np.exp(-bmat[idx] * xs[:, None])
        opt = bond_option(params, T[idx, None], dd[idx], np.where(risky[idx], strikes, 1.0),
                          call=not payer)
        out[idx] = (cr[idx] * opt).sum(axis=1)
    return out


def swaption_price(params: HullWhiteParams, swaption: SwaptionSpec, strike=None, payer: bool = False) -> float:
    return float(swaption_prices(params, swaption.underlying, [swaption.maturity], strike, payer)[0])


def swap_greeks_analytic(curve: DiscountCurve, spec: AmortizingSwapSpec, strike=None,
                         h: float = 1e-4) -> GreekProfile:
    """Delta/Gamma of the spot-starting swap from quote-derivatives of the discounts.

    dV = dA (K - kappa) - A dkappa and
    d2V = d2A (K - kappa) - A d2kappa - (dA dkappa' + dkappa dA'),
    with kappa = Fl / A so that dkappa and d2kappa follow from the first and
    second derivatives of the annuity A and floating leg Fl.
    """
    if len(curve.quotes) == 0:
        raise ValueError("curve carries no calibrating quotes")
    k = spec.fixed_rate if strike is None else strike
    dates = spec.payment_dates
    n, acc = spec.notionals, spec.accruals
    p, dp, d2p = discount_sensitivities(curve, np.concatenate(([spec.start], dates)), h)
    if spec.start == 0.0:
        dp[:, 0] = 0.0
        d2p[:, :, 0] = 0.0
    w_a = n * acc
    a = np.sum(w_a * p[1:])
    da = dp[:, 1:] @ w_a
    d2a = d2p[..., 1:] @ w_a
    fl = np.sum(n * (p[:-1] - p[1:]))
    dfl = (dp[:, :-1] - dp[:, 1:]) @ n
    d2fl = (d2p[..., :-1] - d2p[..., 1:]) @ n
    kappa = fl / a
    dk = (dfl - kappa * da) / a
    d2k = (d2fl - kappa * d2a - np.outer(dk, da) - np.outer(da, dk)) / a
    delta = da * (k - kappa) - a * dk
    gamma = d2a * (k - kappa) - a * d2k - (np.outer(da, dk) + np.outer(dk, da))
    return GreekProfile(delta, gamma)


def calibrating_swap(curve: DiscountCurve, index: int, notional: float = 1.0) -> AmortizingSwapSpec:
    q = curve.quotes[index]
    dates = q.payment_dates()
    return AmortizingSwapSpec(dates, np.full(dates.size, notional), q.par_rate, "bullet")
