import numpy as np
import pytest
from scipy.stats import chisquare, kstest

from epor.housing import HousingModel, mean_path
from epor.hullwhite import HullWhiteParams, state_variance
from epor.oracle import (mc_exposure_decomposition, mc_price, relocation_times, sample_state_and_integral,
                         simulate_joint)
from epor.parallel import set_threads
from epor.relocation import IntensityParams, cumulative_hazard, expected_density
from epor.valuation import make_grid, price, to_bps

FAST = IntensityParams(beta=(-3.0, 54.18, -326.86))


def test_zero_intensity_prices_zero(params, bullet):
    r = mc_price(params, bullet, HousingModel(), IntensityParams(beta=(-800.0, 0.0, 0.0)), 5000, seed=1)
    assert r.price[0] == 0.0 and r.std_err[0] == 0.0


def test_deterministic_limit(curve, bullet, ip):
    p = HullWhiteParams(0.05, 0.0, curve)
    m = HousingModel(kind="flat_random", variance=0.0)
    g = make_grid(0, 10, 1 / 48, bullet.payment_dates)
    ref = price(p, bullet, expected_density(ip, m, g))
    r = mc_price(p, bullet, m, ip, 200000, seed=2)
    assert abs(r.price[0] - ref) <= 3 * r.std_err[0]


def test_cox_sampling_histogram():
    # deterministic but time-varying h: zero OU noise around an increasing trend
    m = HousingModel(ou_eta=0.0, trend="increasing", h0=0.03)
    g = make_grid(0, 10, 1 / 48)
    cum = cumulative_hazard(FAST, g, mean_path(m, g).values[None, :])
    e = np.random.default_rng(6).standard_exponential(100000)
    tau = relocation_times(g, np.broadcast_to(cum, (e.size, g.size)), e)
    edges = np.arange(11.0)
    surv = np.exp(-np.interp(edges, g, cum[0]))
    probs = np.append(-np.diff(surv), surv[-1])
    counts = np.append(np.histogram(tau[np.isfinite(tau)], edges)[0], np.sum(~np.isfinite(tau)))
    assert chisquare(counts, probs * e.size).pvalue > 0.01


def test_relocation_time_interpolates_hazard():
    g = np.array([0.0, 1.0, 2.0])
    cum = np.array([[0.0, 0.5, 1.5]])
    tau = relocation_times(g, np.repeat(cum, 4, axis=0), np.array([0.25, 0.5, 1.0, 2.0]))
    np.testing.assert_allclose(tau[:3], [0.5, 1.0, 1.5])
    assert np.isinf(tau[3])


def test_joint_state_moments(params):
    rng = np.random.default_rng(3)
    t = np.full(200000, 4.0)
    x, ix = sample_state_and_integral(params, t, rng)
    a, s = params.mean_reversion, params.volatility
    assert x.var() == pytest.approx(state_variance(params, 4.0), rel=0.02)
    cov = s**2 / (2 * a * a) * (1 - np.exp(-a * 4.0)) ** 2
    assert np.cov(x, ix)[0, 1] == pytest.approx(cov, rel=0.03)


def test_independence_audit(params, bullet):
    j = simulate_joint(params, bullet, HousingModel(), FAST, 40000, seed=4)
    inside = np.isfinite(j.tau) & (j.tau < 10)
    n = inside.sum()
    hbar = j.h[inside].mean(axis=1)
    z = j.x_tau[inside] / np.sqrt(state_variance(params, j.tau[inside]))
    assert abs(np.corrcoef(hbar, z)[0, 1]) <= 3 / np.sqrt(n)
    assert abs(np.corrcoef(j.exponential[inside], z)[0, 1]) <= 3 / np.sqrt(n)
    assert kstest(z, "norm").pvalue > 0.001


def test_strike_sweep_agreement(params, bullet, grid, ip):
    strikes = [0.025, 0.0275, 0.03, 0.0325, 0.035]
    r = mc_price(params, bullet, HousingModel(), ip, 200000, seed=21, strikes=strikes)
    d = expected_density(ip, HousingModel(), grid, 2000, seed=1, keep_scenarios=False)
    q = np.array([to_bps(price(params, bullet, d, k), bullet) for k in strikes])
    assert np.all(np.abs(q - r.price_bps) <= 3 * r.se_bps)
    assert np.all(np.diff(r.price_bps) > 0)


def test_common_random_numbers_and_threads(params, linear, ip):
    set_threads(1)
    a = mc_price(params, linear, HousingModel(), ip, 40000, seed=8, strikes=[0.03, 0.035])
    set_threads(3)
    try:
        b = mc_price(params, linear, HousingModel(), ip, 40000, seed=8, strikes=[0.03, 0.035])
    finally:
        set_threads(1)
    np.testing.assert_array_equal(a.price, b.price)
    c = mc_price(params, linear, HousingModel(), ip, 40000, seed=8, strikes=[0.03])
    # same paths for any strike set; only summation order differs
    assert c.price[0] == pytest.approx(a.price[0], rel=1e-12)
    assert a.rows()[0][3] == 40000


def test_hazard_step_warning(params, bullet):
    hot = IntensityParams(beta=(3.0, 0.0, 0.0))
    with pytest.warns(RuntimeWarning, match="hazard increment"):
        mc_price(params, bullet, HousingModel(), hot, 100, seed=1, grid_step=0.25)


@pytest.fixture(scope="module")
def dec(params, bullet):
    return mc_exposure_decomposition(params, bullet, HousingModel(), FAST, 20000, seed=3,
                                     probe_dates=[0.5, 2.0, 4.5, 7.0, 9.5])


class TestExposureDecomposition:

    def test_identity(self, dec):
        np.testing.assert_array_equal(dec.S - dec.Y - dec.Z, 0.0)

    def test_porting_paths_have_no_exposure(self, dec):
        assert np.any(dec.region == 2)
        assert np.all(dec.Z[dec.region == 2] == 0.0)
        assert np.all(dec.Z[dec.region <= 1] == 0.0)

    def test_regions_consistent_with_tau(self, dec):
        after = dec.tau[:, None] <= dec.probe_dates[None, :]
        assert np.all((dec.region >= 2) == after)
        fr = dec.region_fractions()
        np.testing.assert_allclose(sum(fr.values()), 1.0)

    def test_prepayment_share_rises_with_strike(self, params, bullet):
        shares = []
        for k in (0.03, 0.035, 0.04):
            d = mc_exposure_decomposition(params, bullet, HousingModel(), FAST, 20000, seed=3,
                                          probe_dates=[9.5], strike=k)
            shares.append(d.region_fractions()["prepayment"][0])
        assert shares[0] < shares[1] < shares[2]

    def test_rejects_bad_probes(self, params, bullet):
        with pytest.raises(ValueError):
            mc_exposure_decomposition(params, bullet, HousingModel(), FAST, 10, seed=0, probe_dates=[11.0])
