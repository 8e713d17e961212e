import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epor.curve import (CurveError, DiscountCurve, SwapQuote, bootstrap, bump_quote, flat_quotes,
                        par_swap_value, read_quotes_csv, shift_quotes, write_curve_csv)


def test_flat_annual_curve_matches_closed_form():
    # annual par rate r on every end date gives P(t_k) = (1 + r)^-k at integer pillars
    c = bootstrap(flat_quotes(0.03, [1, 2, 3, 4, 5]))
    k = np.arange(1, 6)
    np.testing.assert_allclose(c.df(k), 1.03 ** -k, rtol=0, atol=1e-14)


def test_one_year_pillar_is_simple_discount():
    c = bootstrap([SwapQuote(1.0, 0.05)])
    assert c.df(1.0) == pytest.approx(1 / 1.05, abs=1e-15)


def test_log_linear_interpolation_between_pillars():
    c = bootstrap(flat_quotes(0.03, [1, 3]))
    p1, p3 = c.df(1.0), c.df(3.0)
    assert c.df(2.0) == pytest.approx(np.sqrt(p1 * p3), rel=1e-14)


def test_extrapolation_keeps_last_forward(curve):
    f = curve.forward_rate(10.0 - 1e-9)
    assert curve.df(12.0) == pytest.approx(curve.df(10.0) * np.exp(-2 * f), rel=1e-13)


def test_round_trip_reprices_quotes(curve):
    for q in curve.quotes:
        assert abs(par_swap_value(curve, q, 1e4)) <= 1e-12 * 1e4


def _bootstraps(quotes):
    try:
        bootstrap(quotes)
    except CurveError:
        return False
    return True


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-0.01, 0.12), min_size=1, max_size=6),
       st.sampled_from([1, 2, 4]))
def test_round_trip_property(rates, freq):
    ends = np.cumsum(np.arange(1, len(rates) + 1))
    quotes = [SwapQuote(float(e), r, freq) for e, r in zip(ends, rates)]
    try:
        c = bootstrap(quotes)
    except CurveError:
        # only allowed when the fixed leg over already-known dates alone exceeds par
        i = next(i for i in range(1, len(quotes) + 1) if not _bootstraps(quotes[:i]))
        assert i > 1
        prev = bootstrap(quotes[: i - 1])
        q = quotes[i - 1]
        dates = q.payment_dates()
        known = dates <= prev.pillar_times[-1]
        accr = np.diff(np.concatenate(([0.0], dates)))[known]
        assert q.par_rate * np.sum(accr * prev.df(dates[known])) >= 1 - 1e-12
        return
    for q in quotes:
        assert abs(par_swap_value(c, q, 1e4)) <= 1e-12 * 1e4


def test_zero_bump_is_identity(curve):
    np.testing.assert_array_equal(bump_quote(curve, 2, 0.0).pillar_discounts, curve.pillar_discounts)


def test_positive_bump_lowers_long_discount(curve):
    assert bump_quote(curve, 4, 1e-4).df(10.0) < curve.df(10.0)


def test_bump_linearity(curve):
    d1 = (bump_quote(curve, 4, 1e-4).df(10.0) - curve.df(10.0)) / 1e-4
    d2 = (bump_quote(curve, 4, 0.5e-4).df(10.0) - curve.df(10.0)) / 0.5e-4
    assert abs(d1 / d2 - 1) <= 0.01


@pytest.mark.parametrize("i", range(1, 5))
def test_bump_locality(curve, i):
    bumped = bump_quote(curve, i, 1e-4)
    prev_end = curve.quotes[i - 1].end_date
    t = curve.pillar_times[curve.pillar_times < prev_end]
    np.testing.assert_array_equal(bumped.df(t), curve.df(t))


def test_paired_shocks_shift_two_quotes(curve):
    s = shift_quotes(curve, [0.0025, 0.0, -0.0025, 0.0, 0.0])
    np.testing.assert_allclose(s.par_rates - curve.par_rates, [0.0025, 0, -0.0025, 0, 0], atol=1e-16)


def test_bad_inputs():
    with pytest.raises(CurveError):
        bootstrap([])
    with pytest.raises(CurveError):
        SwapQuote(-1.0, 0.03)
    with pytest.raises(CurveError):
        DiscountCurve(np.array([0.0, 1.0]), np.array([1.0, -0.2]))


def test_csv_round_trip(tmp_path, curve):
    p = tmp_path / "quotes.csv"
    p.write_text("end_years,par_rate,frequency\n1,0.03,1\n3,0.03,1\n5,0.03,1\n7,0.03,1\n10,0.03,1\n")
    c = bootstrap(read_quotes_csv(p))
    np.testing.assert_array_equal(c.pillar_discounts, curve.pillar_discounts)
    write_curve_csv(c, tmp_path / "curve.csv")
    assert (tmp_path / "curve.csv").read_text().startswith("pillar_time,discount")
