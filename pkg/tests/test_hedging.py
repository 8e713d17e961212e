import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from epor import hedging as H
from epor.cli import build_context
from epor.config import load_config
from epor.greeks import GreekProfile, greeks
from epor.hullwhite import HullWhiteParams
from epor.relocation import RelocationDensityResult
from epor.valuation import price


@pytest.fixture(scope="module")
def ctx():
    cfg = load_config("actuarial")
    cfg["hm"]["paths"] = 200
    return build_context(cfg)


@pytest.fixture(scope="module")
def ctx5():
    cfg = load_config("bullet_baseline")
    cfg["hm"]["paths"] = 200
    return build_context(cfg, with_scenarios=False)


@pytest.fixture(scope="module")
def opr(ctx):
    return H.hedge_opr(ctx, 6)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(1, 300), elements=st.floats(-1e3, 1e3)), st.floats(0.001, 1.0))
def test_expected_shortfall_definition(x, alpha):
    k = max(1, int(np.ceil(alpha * x.size - 1e-12)))
    assert H.expected_shortfall(x, alpha) == pytest.approx(np.sort(x)[:k].mean(), rel=1e-12, abs=1e-12)
    assert H.expected_shortfall(x, alpha) <= x.mean() + 1e-9


def sym(n, rng):
    a = rng.normal(size=(n, n))
    return a + a.T


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.floats(1e-3, 10.0))
def test_local_weight_is_stationary(seed, k):
    rng = np.random.default_rng(seed)
    ds, dv = rng.normal(size=3), rng.normal(size=3)
    gs, gv = sym(3, rng), sym(3, rng)
    w = H.local_weight(ds, gs, dv, gv, k)
    e = 1e-6 * max(1.0, abs(w))
    f = lambda u: H.local_objective(u, ds, gs, dv, gv, k)
    assert f(w) <= min(f(w + e), f(w - e)) + 1e-15
    assert abs(f(w + e) - f(w - e)) / (2 * e) <= 1e-7 * max(1.0, f(w))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4))
def test_global_solution_solves_normal_equations(seed, m):
    rng = np.random.default_rng(seed)
    dv, gv = rng.normal(size=3), sym(3, rng)
    inst = [GreekProfile(rng.normal(size=3), sym(3, rng)) for _ in range(m)]
    w = H.solve_global(dv, gv, inst, k=0.5)
    D = np.array([g.delta for g in inst])
    G = np.array([g.gamma.ravel() for g in inst])
    grad = D @ (w @ D - dv) / (dv @ dv) + 0.5 * G @ (w @ G - gv.ravel()) / np.sum(gv * gv)
    assert np.max(np.abs(grad)) <= 1e-10 * max(1.0, np.abs(D).max() ** 2)


def test_gammas_symmetric(ctx):
    _, _, gv = ctx.total_greeks()
    assert np.max(np.abs(gv - gv.T)) <= 1e-10 * np.abs(gv).max()
    _, _, gs = ctx.instruments([1.3, 4.7])
    assert np.all(np.abs(gs - gs.transpose(0, 2, 1)) <= 1e-10 * np.abs(gs).max())


def test_context_greeks_match_direct_bumps(ctx):
    f = np.empty(ctx.grid.times.size)
    f[ctx.grid.node_index] = ctx.fbar
    dens = RelocationDensityResult(ctx.grid.times, f, 0.0, np.zeros(f.size), "mc")
    v, dv, gv = ctx.total_greeks()
    ref = greeks(lambda c: price(HullWhiteParams(0.05, 0.01, c), ctx.spec, dens), ctx.params.curve)
    np.testing.assert_allclose(dv, ref.delta, rtol=1e-10)
    np.testing.assert_allclose(gv, ref.gamma, rtol=1e-8, atol=1e-8 * np.abs(gv).max())


def test_spline_instrument_greeks(ctx):
    from epor.instruments import swaption_prices
    T = 3.37
    _, ds, _ = ctx.instruments([T])
    ref = greeks(lambda c: swaption_prices(HullWhiteParams(0.05, 0.01, c), ctx.spec, [T])[0], ctx.params.curve)
    np.testing.assert_allclose(ds[0], ref.delta, rtol=1e-4, atol=1e-6 * np.abs(ref.delta).max())


def test_fxr_mim_bullet_maturities(ctx5):
    s = H.hedge_fxr(ctx5, 3)
    np.testing.assert_allclose(s.maturities, [5 / 3, 5.0, 25 / 3])
    assert np.round(s.maturities, 2).tolist() == [1.67, 5.0, 8.33]


@pytest.mark.parametrize("J", [3, 5])
def test_optimal_maturity_dominates_midpoint(ctx5, J):
    mim = H.hedge_fxr(ctx5, J, "midpoint")
    opm = H.hedge_fxr(ctx5, J, "optimal")
    lm, lo = mim.diagnostics["local_objectives"], opm.diagnostics["local_objectives"]
    assert np.all(lo <= lm + 1e-9)


def test_optimal_ranges_dominate_equal_ranges(ctx, opr):
    eq = H.equal_bounds(ctx, 6)
    assert H.opr_objective(ctx, opr.bounds, H.DEFAULT_K, 0.1) <= H.opr_objective(ctx, eq, H.DEFAULT_K, 0.1) + 1e-9
    assert np.all(np.diff(opr.bounds) >= min(H.MIN_RANGE, 10 / 24) - 1e-12)


def test_eigen_without_penalty_is_fxr(ctx, opr):
    e = H.hedge_eigen(ctx, opr, k_eig=0.0)
    f = H.hedge_fxr(ctx, 6, bounds=opr.bounds)
    np.testing.assert_allclose(e.weights, f.weights, rtol=1e-13)
    # the calibrating swaps close the remaining Delta gap exactly
    assert np.max(np.abs(e.diagnostics["delta_residual"])) <= 1e-8 * np.abs(ctx.total_greeks()[1]).max()


def test_eigen_trade_off(ctx, opr):
    g = H.shock_grid(3)
    costs, es = [], []
    worst = None
    for ke in (0.0, 1.0, 3.0, 10.0):
        e = H.hedge_eigen(ctx, opr, k_eig=ke)
        r = H.shock_analysis(e, ctx, g)
        worst = int(np.argmin(r.es_1pct)) if worst is None else worst
        costs.append(e.cost)
        es.append(r.es_1pct[worst])
    assert np.all(np.diff(costs) >= -1e-9)
    assert np.all(np.diff(es) >= -1e-9)


def test_shock_grid_sizes():
    assert H.shock_grid(3, single_sizes=()).shape == (26, 3)
    g = H.shock_grid(3)
    assert g.shape == (32, 3)
    assert not np.any(np.all(g == 0, axis=1))


def test_zero_shock_and_determinism(ctx, opr):
    shocks = np.array([[0.0, 0.0, 0.0], [25.0, -25.0, 0.0]])
    a = H.shock_analysis(opr, ctx, shocks)
    b = H.shock_analysis(opr, ctx, shocks)
    assert a.es_1pct[0] == 0.0 and a.prob_loss[0] == 0.0
    np.testing.assert_array_equal(a.distributions, b.distributions)


def test_par_swaps_cost_nothing(ctx, opr):
    e = H.hedge_eigen(ctx, opr, k_eig=1.0)
    bare = H.HedgeStrategy("x", e.bounds, e.maturities, e.weights)
    assert H.hedge_cost(e, ctx) == pytest.approx(H.hedge_cost(bare, ctx), abs=1e-9)


def test_strategy_csv_round_trip(tmp_path, ctx, opr):
    e = H.hedge_eigen(ctx, opr, k_eig=1.0)
    e.write_csv(tmp_path / "s.csv")
    e.write_swaps_csv(tmp_path / "s_swaps.csv", ctx.params.curve)
    r = H.read_strategy_csv(tmp_path / "s.csv", tmp_path / "s_swaps.csv")
    np.testing.assert_allclose(r.weights, e.weights, rtol=1e-11)
    np.testing.assert_allclose(r.swap_weights, e.swap_weights, rtol=1e-11)
    np.testing.assert_allclose(r.bounds, e.bounds, rtol=1e-9)
    head = (tmp_path / "s.csv").read_text().splitlines()[0]
    assert head == "range_lo,range_hi,maturity,weight"


def test_shock_csv_layout(tmp_path, ctx, opr):
    r = H.shock_analysis(opr, ctx, H.shock_grid(3)[:3])
    r.write_csv(tmp_path / "shock.csv")
    lines = (tmp_path / "shock.csv").read_text().splitlines()
    assert lines[0] == "shock_vector,es_1pct,prob_loss"
    assert lines[1].startswith("[-25 -25 -25],")


def test_bad_arguments(ctx5):
    with pytest.raises(ValueError):
        H.hedge_fxr(ctx5, 0)
    with pytest.raises(ValueError):
        H.hedge_opr(ctx5, 1)
    with pytest.raises(ValueError):
        H.hedge_eigen(ctx5)
