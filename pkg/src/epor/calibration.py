"""Calibration of the housing and relocation models from monthly series.

Inputs are monthly fractions: h_frac, the share of the housing stock traded
in the month, and p_frac, the share of borrowers relocating. The annualised
activity is h = h_frac / dt.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np
from scipy.special import expit, xlog1py, xlogy

from .housing import HousingModel, level_params, sample_scenarios
from .relocation import IntensityParams

MONTH = 1.0 / 12.0
MONTH_RE = re.compile(r"^(\d{4})-(\d{2})(?:-(\d{2}))?$")


class CalibrationError(RuntimeError):
    """A fit did not converge or the data do not support the model."""


class ObservationError(ValueError):
    """Input data violate the observation schema."""


@dataclass(frozen=True)
class HmObservation:
    month: str
    h_frac: float
    p_frac: float
    exposures: int | None = None

    def __post_init__(self):
        if not MONTH_RE.match(self.month):
            raise ObservationError(f"bad month {self.month!r}, expected YYYY-MM or YYYY-MM-DD")
        for name in ("h_frac", "p_frac"):
            v = getattr(self, name)
            if not (np.isfinite(v) and 0.0 <= v <= 1.0):
                raise ObservationError(f"{name}={v} outside [0, 1] in {self.month}")
        if self.exposures is not None and self.exposures <= 0:
            raise ObservationError(f"exposures must be positive in {self.month}")


def month_label(start: str, k: int) -> str:
    m = MONTH_RE.match(start)
    if not m:
        raise ObservationError(f"bad start month {start!r}")
    y, mo = int(m.group(1)), int(m.group(2)) - 1 + k
    return date(y + mo // 12, mo % 12 + 1, 1).strftime("%Y-%m")


def read_observations_csv(path) -> list[HmObservation]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        missing = {"month", "h_frac", "p_frac"} - set(cols)
        if missing:
            raise ObservationError(f"{path}: missing columns {sorted(missing)}")
        rows = []
        for i, r in enumerate(reader, start=2):
            try:
                exp = r.get("exposures")
                rows.append(HmObservation(r["month"].strip(), float(r["h_frac"]), float(r["p_frac"]),
                                          int(exp) if exp not in (None, "") else None))
            except (TypeError, ValueError) as err:
                raise ObservationError(f"{path}:{i}: {err}") from err
    if not rows:
        raise ObservationError(f"{path}: no observations")
    return rows


def write_observations_csv(observations, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        has_exp = any(o.exposures is not None for o in observations)
        w.writerow(["month", "h_frac", "p_frac"] + (["exposures"] if has_exp else []))
        for o in observations:
            row = [o.month, f"{o.h_frac:.17g}", f"{o.p_frac:.17g}"]
            w.writerow(row + ([o.exposures] if has_exp else []))


def _h_series(observations, dt):
    if isinstance(observations, np.ndarray):
        return np.asarray(observations, dtype=float)
    return np.array([o.h_frac for o in observations]) / dt


@dataclass(frozen=True)
class DistributionFit:
    kind: str
    mean: float
    variance: float
    params: tuple
    n: int


def moment_fit(observations, kind: str = "normal", dt: float = MONTH) -> DistributionFit:
    """Sample mean and (unbiased) variance of h, mapped to the native parameters of `kind`."""
    h = _h_series(observations, dt)
    if h.size < 2:
        raise ObservationError("moment fit needs at least two observations")
    mean = float(h.mean())
    var = 0.0 if np.ptp(h) == 0 else float(h.var(ddof=1))
    if var == 0.0 and kind != "normal":
        raise CalibrationError(f"{kind} fit needs a positive sample variance")
    return DistributionFit(kind, mean, var, tuple(float(v) for v in level_params(kind, mean, var)), h.size)


@dataclass(frozen=True)
class OuFit:
    alpha: float
    eta: float
    theta: float
    rho: float
    innovation_sd: float
    n: int
    dt: float
    weakly_identified: bool

    @property
    def stationary_variance(self) -> float:
        return self.eta**2 / (2 * self.alpha)


def ou_mle(observations, dt: float = MONTH, weak_threshold: float = 3.0) -> OuFit:
    """Exact-discretisation OU fit, i.e. the conditional Gaussian AR(1) MLE.

    x_{k+1} = c + rho x_k + e_k, rho = exp(-alpha dt),
    Var(e) = eta^2 (1 - rho^2) / (2 alpha). When alpha dt exceeds
    `weak_threshold`, or rho is within two standard errors (2/sqrt(n)) of
    zero, the autocorrelation is too small for alpha to be identified at
    this sampling frequency and the fit is flagged.
    """
    x = _h_series(observations, dt)
    if x.size < 3:
        raise ObservationError("OU fit needs at least three observations")
    x0, x1 = x[:-1], x[1:]
    d0 = x0 - x0.mean()
    sxx = float(d0 @ d0)
    if sxx == 0.0:
        raise CalibrationError("constant series: OU parameters are not identified")
    rho = float(d0 @ (x1 - x1.mean())) / sxx
    if not 0.0 < rho < 1.0:
        raise CalibrationError(f"non-mean-reverting series: AR(1) coefficient {rho:.4g} outside (0, 1)")
    c = x1.mean() - rho * x0.mean()
    resid = x1 - c - rho * x0
    s2 = float(resid @ resid) / resid.size
    alpha = -np.log(rho) / dt
    eta = float(np.sqrt(s2 * 2 * alpha / (1 - rho * rho)))
    return OuFit(float(alpha), eta, float(c / (1 - rho)), rho, float(np.sqrt(s2)), x.size, dt,
                 bool(alpha * dt > weak_threshold or rho < 2.0 / np.sqrt(x0.size)))


@dataclass
class LogisticFit:
    params: IntensityParams
    beta_monthly: np.ndarray
    cov_monthly: np.ndarray
    beta_annual: np.ndarray
    cov_annual: np.ndarray
    iterations: int
    grad_norm: float
    loglik_path: list = field(default_factory=list)
    weighting: str = "binomial"

    def std_err(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov_annual))

    def conf_int(self, z: float = 1.959963984540054) -> np.ndarray:
        se = self.std_err()
        return np.column_stack((self.beta_annual - z * se, self.beta_annual + z * se))


def _loglik(eta, y, n):
    # y log p + (n - y) log(1 - p) with p = expit(eta), written to stay finite
    return float(np.sum(xlogy(y, expit(eta)) + xlog1py(n - y, -expit(eta))))


def logistic_intensity_fit(observations, dt: float = MONTH, weighting: str = "auto",
                           max_iter: int = 200, tol: float = 1e-10) -> LogisticFit:
    """Quadratic-in-h logistic fit of the monthly relocation fraction.

    The regression runs in monthly coordinates (h_frac) on standardised
    regressors, by damped Newton/IRLS steps with step halving so that the
    log-likelihood never decreases. Convergence is declared when the
    gradient of the per-borrower log-likelihood has norm <= tol.

    weighting: "binomial" needs exposures (successes = p_frac * exposures);
    "quasi" gives every month unit weight on its fraction; "auto" picks
    binomial when every row has exposures.
    """
    obs = list(observations)
    if len(obs) < 10:
        raise ObservationError("logistic fit needs at least ten observations")
    hm = np.array([o.h_frac for o in obs])
    p = np.array([o.p_frac for o in obs])
    has_exp = all(o.exposures is not None for o in obs)
    if weighting == "auto":
        weighting = "binomial" if has_exp else "quasi"
    if weighting == "binomial":
        if not has_exp:
            raise ObservationError("binomial weighting needs exposures on every row")
        n = np.array([o.exposures for o in obs], dtype=float)
    elif weighting == "quasi":
        n = np.ones(len(obs))
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    y = p * n
    if np.all(y == 0) or np.all(y == n):
        raise CalibrationError("separation: no relocations or all borrowers relocating")

    loc, scale = hm.mean(), hm.std()
    if scale <= 1e-12 * max(abs(loc), 1e-300):
        raise CalibrationError("h_frac is constant: the quadratic model is not identified")
    z = (hm - loc) / scale
    X = np.column_stack((np.ones_like(z), z, z * z))
    total = n.sum()
    pbar = y.sum() / total
    b = np.array([np.log(pbar / (1 - pbar)), 0.0, 0.0])
    ll = _loglik(X @ b, y, n)
    path = [ll]
    grad_norm = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        mu = expit(X @ b)
        grad = X.T @ (y - n * mu)
        grad_norm = float(np.linalg.norm(grad / total))
        if grad_norm <= tol:
            break
        w = n * mu * (1 - mu)
        step = np.linalg.solve(X.T @ (X * w[:, None]), grad)
        t = 1.0
        while t >= 1e-12:
            cand = b + t * step
            ll_new = _loglik(X @ cand, y, n)
            if ll_new >= ll:
                break
            t *= 0.5
        else:
            # no ascent left at machine precision: stationary up to rounding
            break
        b, ll = cand, ll_new
        path.append(ll)
        if np.max(np.abs(b)) > 1e6:
            raise CalibrationError("coefficients diverging: quasi-separation in the data")
    mu = expit(X @ b)
    grad_norm = float(np.linalg.norm(X.T @ (y - n * mu) / total))
    if grad_norm > tol:
        raise CalibrationError(f"IRLS stopped after {it} iterations with |grad| = {grad_norm:.3g} > {tol:g}")
    mu = expit(X @ b)
    cov_std = np.linalg.inv(X.T @ (X * (n * mu * (1 - mu))[:, None]))
    if weighting == "quasi":
        # dispersion from Pearson residuals; binomial variance on a unit "count" is only a working model
        resid = (y - n * mu) / np.sqrt(n * mu * (1 - mu))
        cov_std = cov_std * float(resid @ resid) / max(len(obs) - 3, 1)
    # b0 + b1 z + b2 z^2 with z = (h - loc)/scale  ->  coefficients on (1, h, h^2)
    T = np.array([[1.0, -loc / scale, loc**2 / scale**2],
                  [0.0, 1.0 / scale, -2 * loc / scale**2],
                  [0.0, 0.0, 1.0 / scale**2]])
    beta_m = T @ b
    cov_m = T @ cov_std @ T.T
    D = np.diag([1.0, dt, dt * dt])
    beta_a = D @ beta_m
    cov_a = D @ cov_m @ D
    return LogisticFit(IntensityParams(tuple(beta_a), dt, "linear"), beta_m, cov_m, beta_a, cov_a,
                       it, grad_norm, path, weighting)


def monthly_beta(params: IntensityParams, dt: float = MONTH) -> np.ndarray:
    """Coefficients on (1, h_frac, h_frac^2) reproducing the annual ones when h = h_frac / dt."""
    return np.asarray(params.beta) / np.array([1.0, dt, dt * dt])


def relocation_probability(params: IntensityParams, h_frac, dt: float = MONTH):
    b = monthly_beta(params, dt)
    h = np.asarray(h_frac, dtype=float)
    g = b[0] + (b[1] + b[2] * h) * h
    if params.mapping == "linear":
        return expit(g)
    return -np.expm1(-np.logaddexp(0.0, g))


def synth_generate(params: IntensityParams, model: HousingModel, months: int, borrowers: int,
                   seed: int, start: str = "2000-01", dt: float = MONTH) -> list[HmObservation]:
    """Monthly observations with h from `model` and binomial relocation counts.

    The housing path and the binomial draws use independent children of
    SeedSequence(seed). Monthly fractions are clipped to [0, 1].
    """
    if months < 12:
        raise ValueError("need at least twelve months")
    if borrowers < 1:
        raise ValueError("need at least one borrower")
    ss_h, ss_b = np.random.SeedSequence(seed).spawn(2)
    grid = model.t0 + dt * np.arange(months)
    h = sample_scenarios(model, grid, 1, int(ss_h.generate_state(1)[0])).values[0]
    h_frac = np.clip(h * dt, 0.0, 1.0)
    prob = relocation_probability(params, h_frac, dt)
    counts = np.random.default_rng(ss_b).binomial(borrowers, prob)
    return [HmObservation(month_label(start, k), float(hf), float(c) / borrowers, int(borrowers))
            for k, (hf, c) in enumerate(zip(h_frac, counts))]

