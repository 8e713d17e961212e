import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import expit

from epor.calibration import monthly_beta, relocation_probability
from epor.housing import HousingModel, mean_path, sample_scenarios
from epor.relocation import (IntensityParams, cumulative_hazard, density_paths, expected_density, intensity,
                             intensity_derivatives, realized_density, write_density_csv)
from epor.valuation import make_grid


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 0.2))
def test_rescaling_consistency(h):
    ip = IntensityParams()
    dt = 1 / 12
    bm = monthly_beta(ip, dt)
    hdt = h * dt
    p = expit(bm[0] + bm[1] * hdt + bm[2] * hdt**2)
    assert intensity(ip, h) == pytest.approx(p / dt, rel=1e-12)
    assert relocation_probability(ip, hdt, dt) == pytest.approx(p, rel=1e-12)


def test_cloglog_mapping():
    ip = IntensityParams(mapping="cloglog")
    p = float(expit(-7.5 + 54.18 * 0.05 - 326.86 * 0.0025))
    assert intensity(ip, 0.05) == pytest.approx(-np.log1p(-p) * 12, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.05, 0.3), st.sampled_from(["linear", "cloglog"]))
def test_intensity_derivatives(h, mapping):
    ip = IntensityParams(mapping=mapping)
    lam, d1, d2 = intensity_derivatives(ip, np.array([h]))
    e = 1e-5
    up, dn = intensity(ip, h + e), intensity(ip, h - e)
    assert d1[0] == pytest.approx((up - dn) / (2 * e), rel=1e-6, abs=1e-9)
    assert d2[0] == pytest.approx((up - 2 * lam[0] + dn) / e**2, rel=1e-4, abs=1e-6)


def test_constant_path_is_exponential(ip):
    g = np.linspace(0, 10, 101)
    f, s = density_paths(ip, g, np.full(g.size, 0.05))
    lam = intensity(ip, 0.05)
    np.testing.assert_allclose(f, lam * np.exp(-lam * g), rtol=1e-13)
    np.testing.assert_allclose(s, np.exp(-lam * g), rtol=1e-13)


@pytest.mark.parametrize("kind", ["ou", "flat_random", "linear_ramp"])
def test_normalisation_per_scenario(ip, kind):
    g = np.linspace(0, 10, 4801)
    s = sample_scenarios(HousingModel(kind=kind), g, 200, seed=2).values
    f, surv = density_paths(ip, g, s)
    # the trapezoid rule matches the trapezoid hazard, so the defect is O(lambda^2 dt^2) per step
    cum = np.concatenate((np.zeros((f.shape[0], 1)), np.cumsum(0.5 * (f[:, 1:] + f[:, :-1]) * np.diff(g), axis=1)), axis=1)
    assert np.max(np.abs(cum + surv - 1)) <= 1e-8


def test_jensen_gap(ip, grid):
    m = HousingModel(kind="flat_random")
    fbar = expected_density(ip, m, grid).expected_density
    fmean, _ = density_paths(ip, grid, mean_path(m, grid).values)
    assert np.max(np.abs(fbar - fmean)) > 1e-6


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.5, 1.0))
def test_density_bounded_by_cap(level):
    ip = IntensityParams()
    g = np.linspace(0, 10, 41)
    f, _ = density_paths(ip, g, np.full(g.size, level))
    assert np.all(f <= 1 / ip.dt_ref)


def test_quadrature_and_mc_agree(ip, grid):
    m = HousingModel(kind="flat_random", distribution="lognormal")
    q = expected_density(ip, m, grid, mode="quadrature")
    mc = expected_density(ip, m, grid, 20000, seed=3, mode="mc", keep_scenarios=False)
    z = (mc.expected_density - q.expected_density)[1:] / mc.std_err[1:]
    assert np.max(np.abs(z)) < 5
    assert abs(q.mass_defect()) < 1e-6 and abs(mc.mass_defect()) < 1e-6


def test_mc_keeps_scenarios(ip, grid):
    r = expected_density(ip, HousingModel(), grid, 300, seed=1)
    assert r.scenarios.values.shape == (300, grid.size)
    f, _ = density_paths(ip, grid, r.scenarios.values)
    np.testing.assert_allclose(f.mean(axis=0), r.expected_density, rtol=1e-12)


def test_realized_density_off_grid(ip):
    g = np.linspace(0, 1, 5)
    sc = sample_scenarios(HousingModel(), g, 1, seed=0)[0]
    assert realized_density(ip, sc, 1.0) == pytest.approx(density_paths(ip, g, sc.values)[0][-1])
    assert realized_density(ip, sc, 0.6) > 0


def test_cumulative_hazard_nondecreasing(ip, grid):
    s = sample_scenarios(HousingModel(), grid, 50, seed=4).values
    assert np.all(np.diff(cumulative_hazard(ip, grid, s), axis=1) >= 0)


def test_invalid_params():
    with pytest.raises(ValueError):
        IntensityParams(beta=(1.0, 2.0))
    with pytest.raises(ValueError):
        IntensityParams(mapping="probit")


def test_density_export(tmp_path, ip):
    g = make_grid(0, 10, 1 / 4, range(1, 11))
    write_density_csv(expected_density(ip, HousingModel(), g, 20, seed=0), tmp_path / "d.csv")
    assert (tmp_path / "d.csv").read_text().splitlines()[0] == "T,expected_density,std_err"
