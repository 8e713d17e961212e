"""Discount curve bootstrapped from par swap quotes.

Discount factors are interpolated log-linearly between pillars (piecewise
flat continuously compounded forwards) and extrapolated with the last
forward beyond the final pillar.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.optimize import brentq


class CurveError(ValueError):
    pass


@dataclass(frozen=True)
class SwapQuote:
    end_date: float
    par_rate: float
    payment_frequency: int = 1

    def __post_init__(self):
        if not self.end_date > 0:
            raise CurveError(f"quote end date must be positive, got {self.end_date}")
        if int(self.payment_frequency) != self.payment_frequency or self.payment_frequency < 1:
            raise CurveError(f"payment frequency must be an integer >= 1, got {self.payment_frequency}")
        if not np.isfinite(self.par_rate):
            raise CurveError("par rate must be finite")

    def payment_dates(self) -> np.ndarray:
        """Fixed-leg dates stepping back from the end date; a short first stub if needed."""
        step = 1.0 / self.payment_frequency
        n = int(np.ceil(self.end_date / step - 1e-9))
        dates = self.end_date - step * np.arange(n - 1, -1, -1)
        return dates[dates > 1e-12]


def par_swap_value(curve: "DiscountCurve", quote: SwapQuote, notional: float = 1.0) -> float:
    """Receiver value (fixed minus float) of the calibrating swap on `curve`."""
    dates = quote.payment_dates()
    accr = np.diff(np.concatenate(([0.0], dates)))
    p = curve.df(dates)
    return notional * (quote.par_rate * np.sum(accr * p) - (1.0 - p[-1]))


@dataclass(frozen=True)
class DiscountCurve:
    pillar_times: np.ndarray
    pillar_discounts: np.ndarray
    quotes: tuple = field(default=())

    def __post_init__(self):
        t = np.asarray(self.pillar_times, dtype=float)
        p = np.asarray(self.pillar_discounts, dtype=float)
        if t.ndim != 1 or t.shape != p.shape or t.size < 1:
            raise CurveError("pillar arrays must be 1-d and of equal length")
        if t[0] != 0.0 or p[0] != 1.0:
            raise CurveError("curve must start at t0=0 with discount 1")
        if np.any(np.diff(t) <= 0):
            raise CurveError("pillar times must be strictly increasing")
        if np.any(p <= 0) or not np.all(np.isfinite(p)):
            bad = int(np.argmax((p <= 0) | ~np.isfinite(p)))
            raise CurveError(f"non-positive discount factor at pillar t={t[bad]}")
        t.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "pillar_times", t)
        object.__setattr__(self, "pillar_discounts", p)
        object.__setattr__(self, "quotes", tuple(self.quotes))
        object.__setattr__(self, "_logp", np.log(p))

    def log_df(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        t, lp = self.pillar_times, self._logp
        if np.any(s < 0):
            raise CurveError("discount requested before t0")
        if t.size == 1:
            return np.zeros_like(s)
        out = np.interp(s, t, lp)
        beyond = s > t[-1]
        if np.any(beyond):
            slope = (lp[-1] - lp[-2]) / (t[-1] - t[-2])
            out = np.where(beyond, lp[-1] + slope * (s - t[-1]), out)
        return out

    def df(self, s) -> np.ndarray:
        """P(t0; s)."""
        return np.exp(self.log_df(s))

    def discount(self, t, s) -> np.ndarray:
        """P(t; s) = P(t0; s) / P(t0; t)."""
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        if np.any(s < t - 1e-14):
            raise CurveError("discount requires s >= t")
        return np.exp(self.log_df(s) - self.log_df(t))

    def forward_rate(self, s) -> np.ndarray:
        """Instantaneous forward (piecewise constant, right-continuous)."""
        s = np.asarray(s, dtype=float)
        t, lp = self.pillar_times, self._logp
        slopes = -np.diff(lp) / np.diff(t)
        idx = np.clip(np.searchsorted(t, s, side="right") - 1, 0, slopes.size - 1)
        return slopes[idx]

    @property
    def par_rates(self) -> np.ndarray:
        return np.array([q.par_rate for q in self.quotes])


def bootstrap(quotes) -> DiscountCurve:
    """Sequential pillar-by-pillar bootstrap; one log-discount unknown per quote."""
    quotes = tuple(quotes)
    if not quotes:
        raise CurveError("at least one quote is required")
    ends = np.array([q.end_date for q in quotes])
    if np.any(np.diff(ends) <= 0):
        raise CurveError("quotes must be sorted by strictly increasing end date")

    times = [0.0]
    logp = [0.0]
    for q in quotes:
        dates = q.payment_dates()
        accr = np.diff(np.concatenate(([0.0], dates)))
        t_prev, lp_prev = times[-1], logp[-1]
        known = dates <= t_prev
        lp_known = np.interp(dates[known], times, logp)
        w = (dates[~known] - t_prev) / (q.end_date - t_prev)
        known_fixed = q.par_rate * np.sum(accr[known] * np.exp(lp_known))

        def value(y):
            p_new = np.exp((1.0 - w) * lp_prev + w * y)
            return known_fixed + q.par_rate * np.sum(accr[~known] * p_new) - 1.0 + p_new[-1]

        def slope(y):
            p_new = np.exp((1.0 - w) * lp_prev + w * y)
            return q.par_rate * np.sum(accr[~known] * w * p_new) + p_new[-1]

        y = lp_prev - q.par_rate * (q.end_date - t_prev)
        converged = False
        # Newton may overshoot into overflow; that case falls through to the bracket
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(50):
                g = value(y)
                if abs(g) <= 1e-15:
                    converged = True
                    break
                d = slope(y)
                if not np.isfinite(d) or d <= 0:
                    break
                step = g / d
                y -= step
                if abs(step) <= 1e-15 * max(1.0, abs(y)):
                    converged = abs(value(y)) <= 1e-14
                    break
            if not converged:
                y = _bracketed_root(value, lp_prev, q)
        if not np.isfinite(y):
            raise CurveError(f"non-positive discount factor at pillar t={q.end_date}")
        times.append(q.end_date)
        logp.append(y)
    return DiscountCurve(np.array(times), np.exp(np.array(logp)), quotes)


def _bracketed_root(value, lp_prev, q):
    lo, hi = lp_prev - 1.0, lp_prev + 1.0
    for _ in range(60):
        if value(lo) < 0 < value(hi):
            return brentq(value, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
        lo -= 2.0 * (hi - lo)
        hi += 1.0
        if lo < -700:
            break
    raise CurveError(f"non-positive discount factor at pillar t={q.end_date}: no root for par {q.par_rate}")


def flat_quotes(rate: float, ends, frequency: int = 1):
    return [SwapQuote(float(e), float(rate), int(frequency)) for e in ends]


def shift_quotes(curve: DiscountCurve, shifts) -> DiscountCurve:
    """Re-bootstrap with every quote shifted by the matching entry of `shifts`."""
    shifts = np.broadcast_to(np.asarray(shifts, dtype=float), (len(curve.quotes),))
    return bootstrap([replace(q, par_rate=q.par_rate + float(d)) for q, d in zip(curve.quotes, shifts)])


def bump_quote(curve: DiscountCurve, index: int, size: float) -> DiscountCurve:
    if not 0 <= index < len(curve.quotes):
        raise IndexError(f"quote index {index} out of range")
    shifts = np.zeros(len(curve.quotes))
    shifts[index] = size
    return shift_quotes(curve, shifts)


def read_quotes_csv(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise CurveError(f"{path}: no quotes")
    try:
        return [SwapQuote(float(r["end_years"]), float(r["par_rate"]), int(r.get("frequency") or 1))
                for r in rows]
    except KeyError as exc:
        raise CurveError(f"{path}: missing column {exc}") from None


def write_curve_csv(curve: DiscountCurve, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pillar_time", "discount"])
        for t, p in zip(curve.pillar_times, curve.pillar_discounts):
            w.writerow([f"{t:.10g}", f"{p:.17g}"])
