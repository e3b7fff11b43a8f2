import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from soilkrige.errors import InsufficientDataError, ValidationError
from soilkrige.variogram import (
    ExperimentalVariogram,
    VariogramBin,
    VariogramParams,
    evaluate,
    experimental_semivariogram,
    fit_linear,
    weighted_sse,
)

params_st = st.builds(
    VariogramParams,
    st.floats(0, 50),
    st.floats(1, 200),
    st.floats(0, 500),
)


def bins_from(params, lags, pairs=None):
    pairs = pairs if pairs is not None else [10] * len(lags)
    return ExperimentalVariogram(
        tuple(VariogramBin(float(h), float(evaluate(params, h)), int(n)) for h, n in zip(lags, pairs))
    )


def test_eval_examples():
    p = VariogramParams(1, 10, 4)
    assert evaluate(p, 0) == 0.0
    assert evaluate(p, 5) == 3.0
    assert evaluate(p, 20) == 5.0
    assert evaluate(p, 10) == 5.0


def test_eval_negative_lag():
    with pytest.raises(ValidationError):
        evaluate(VariogramParams(1, 10, 4), -1e-12)


@pytest.mark.parametrize("bad", [(-1, 10, 1), (0, 0, 1), (0, 10, -1), (0, math.inf, 1)])
def test_params_validation(bad):
    with pytest.raises(ValidationError):
        VariogramParams(*bad)


@given(params_st, st.lists(st.floats(1e-6, 1e3), min_size=2, max_size=20))
def test_eval_monotone_and_bounded(p, hs):
    hs = np.sort(hs)
    g = evaluate(p, hs)
    assert np.all(np.diff(g) >= -1e-9)
    assert np.all(g <= p.total_sill + 1e-9)


def test_single_pair_bin():
    ev = experimental_semivariogram([(0, 0), (7, 0)], [10, 14], 10, 20)
    assert ev.bins == (VariogramBin(7.0, 8.0, 1),)


def test_equal_values_give_zero_bins(rng):
    xy = rng.uniform(0, 50, (8, 2))
    ev = experimental_semivariogram(xy, np.full(8, 3.3), 5, 60)
    assert all(b.gamma == 0 for b in ev.bins)


def test_too_few_samples():
    with pytest.raises(InsufficientDataError):
        experimental_semivariogram([(0, 0)], [1], 1, 1)


def brute_force_bins(xy, z, w, max_lag):
    acc = {}
    for i, j in itertools.combinations(range(len(z)), 2):
        d = math.dist(xy[i], xy[j])
        if d == 0 or d > max_lag:
            continue
        k = min(int(d // w), math.ceil(max_lag / w) - 1)
        acc.setdefault(k, []).append((d, 0.5 * (z[i] - z[j]) ** 2))
    return [
        (sum(d for d, _ in v) / len(v), sum(g for _, g in v) / len(v), len(v))
        for k, v in sorted(acc.items())
    ]


def test_matches_brute_force_five_samples():
    xy = [(0.0, 0.0), (3.0, 4.0), (10.0, 1.0), (6.0, 8.0), (12.5, 12.5)]
    z = [10.0, 12.0, 7.5, 20.0, 15.0]
    ev = experimental_semivariogram(xy, z, 4.0, 20.0)
    expected = brute_force_bins(xy, z, 4.0, 20.0)
    assert len(ev.bins) == len(expected)
    for b, (lag, gamma, n) in zip(ev.bins, expected):
        assert b.lag == pytest.approx(lag, rel=1e-14)
        assert b.gamma == pytest.approx(gamma, rel=1e-14)
        assert b.pairs == n


def test_lags_strictly_increasing(rng):
    xy = rng.uniform(0, 100, (30, 2))
    ev = experimental_semivariogram(xy, rng.normal(size=30), 5, 70)
    assert np.all(np.diff(ev.lags) > 0)
    assert np.all(ev.pairs >= 1)


def test_coincident_pairs_skipped():
    ev = experimental_semivariogram([(0, 0), (0, 0), (3, 0)], [1, 5, 2], 5, 10)
    assert sum(b.pairs for b in ev.bins) == 2


@given(st.floats(-1e3, 1e3), st.floats(0.01, 100))
def test_shift_and_scale(shift, scale):
    rng = np.random.default_rng(7)
    xy = rng.uniform(0, 40, (12, 2))
    z = rng.normal(50, 10, 12)
    base = experimental_semivariogram(xy, z, 5, 30).gammas
    shifted = experimental_semivariogram(xy, z + shift, 5, 30).gammas
    scaled = experimental_semivariogram(xy, z * scale, 5, 30).gammas
    assert np.allclose(shifted, base, rtol=1e-6, atol=1e-6 * max(1.0, abs(shift)) ** 2)
    assert np.allclose(scaled, scale**2 * base, rtol=1e-9)


def test_recovers_linear_model():
    p = VariogramParams(2, 30, 6)
    ev = bins_from(p, np.arange(2.5, 100, 5.0))
    fit = fit_linear(ev)
    assert fit.nugget == pytest.approx(2, rel=1e-3)
    assert fit.range == pytest.approx(30, rel=1e-3)
    assert fit.sill == pytest.approx(6, rel=1e-3)
    assert not fit.degenerate


def test_constant_bins_are_pure_nugget():
    ev = ExperimentalVariogram(tuple(VariogramBin(h, 5.0, 3) for h in (1.0, 2.0, 3.0, 4.0)))
    fit = fit_linear(ev)
    assert fit.degenerate
    assert fit.nugget + fit.sill == pytest.approx(5.0)


def test_all_zero_bins():
    ev = ExperimentalVariogram(tuple(VariogramBin(h, 0.0, 3) for h in (1.0, 2.0, 3.0)))
    fit = fit_linear(ev)
    assert fit.degenerate
    assert (fit.nugget, fit.range, fit.sill) == (0.0, 3.0, 0.0)


def test_too_few_bins():
    with pytest.raises(InsufficientDataError):
        fit_linear(ExperimentalVariogram((VariogramBin(1, 1, 1), VariogramBin(2, 2, 1))))


def test_noisy_fit_beats_truth(rng):
    truth = VariogramParams(20, 45, 180)
    lags = np.arange(2.5, 90, 5.0)
    for _ in range(20):
        pairs = rng.integers(3, 200, len(lags))
        g = evaluate(truth, lags) + rng.normal(0, 15, len(lags))
        ev = ExperimentalVariogram(tuple(VariogramBin(h, max(v, 0), int(n)) for h, v, n in zip(lags, g, pairs)))
        fit = fit_linear(ev)
        assert weighted_sse(fit, ev) <= weighted_sse(truth, ev) * (1 + 1e-9)
        assert fit.range <= lags.max()


@given(
    st.floats(0, 10),
    st.floats(8, 95),
    st.floats(0.5, 10),
    st.lists(st.integers(1, 50), min_size=20, max_size=20),
)
def test_recovery_property(p0, p1, p2, pairs):
    p = VariogramParams(p0, p1, p2)
    ev = bins_from(p, np.arange(2.5, 100, 5.0), pairs)
    fit = fit_linear(ev)
    for a, b in zip(p.astuple(), fit.astuple()):
        assert abs(a - b) <= 1e-3 * max(abs(a), 1e-3 * p2)
