import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from soilkrige.errors import NegativeVarianceError, SingularMatrixError, ValidationError
from soilkrige.grid import LayerSpec, Sample, build_grid
from soilkrige.kriging import (
    KrigingSystem,
    build_layered_model,
    clamp_variance,
    estimate,
    krige_layer,
    lift_nugget,
    min_conditional_eigenvalue,
    solve_weights,
    variance,
)
from soilkrige.variogram import VariogramParams


def gamma(p, h):
    """Independent scalar evaluation of the bounded linear model."""
    if h == 0:
        return 0.0
    return p.nugget + p.sill * min(h / p.range, 1.0)


def dense_oracle(locs, p, target):
    n = len(locs)
    a = np.zeros((n + 1, n + 1))
    for i in range(n):
        for j in range(n):
            a[i, j] = gamma(p, math.dist(locs[i], locs[j]))
    a[:n, n] = a[n, :n] = 1.0
    g0 = np.array([gamma(p, math.dist(x, target)) for x in locs])
    sol = np.linalg.solve(a, np.append(g0, 1.0))
    return sol[:n], sol[n], g0


def test_single_sample():
    sol = solve_weights([(3.0, 4.0)], VariogramParams(1, 10, 4), (0.0, 0.0))
    assert sol.weights.tolist() == [1.0]
    # gamma(5) = 3: the first equation reads 0 * w + lam = 3
    assert sol.lagrange == pytest.approx(3.0)
    assert variance(sol, [3.0]) == pytest.approx(6.0)  # 2 * gamma(h)


@given(st.floats(0.1, 50), st.floats(0, 5), st.floats(1, 60), st.floats(0.1, 10))
def test_single_sample_variance_twice_gamma(h, p0, p1, p2):
    p = VariogramParams(p0, p1, p2)
    sol = solve_weights([(h, 0.0)], p, (0.0, 0.0))
    assert variance(sol, [gamma(p, h)], p.total_sill) == pytest.approx(2 * gamma(p, h), rel=1e-9)


def test_symmetric_pair():
    for p in (VariogramParams(0, 5, 1), VariogramParams(3, 50, 20)):
        sol = solve_weights([(-2.0, 1.0), (2.0, 1.0)], p, (0.0, 7.0))
        assert np.allclose(sol.weights, [0.5, 0.5], atol=1e-12)


def test_four_samples_against_dense_solve():
    locs = [(0.0, 0.0), (10.0, 2.0), (3.0, 9.0), (12.0, 11.0)]
    p = VariogramParams(0.5, 15.0, 4.0)
    target = (5.0, 5.0)
    sol = solve_weights(locs, p, target)
    w, lam, _ = dense_oracle(locs, p, target)
    assert np.allclose(sol.weights, w, atol=1e-8)
    assert sol.lagrange == pytest.approx(lam, abs=1e-8)
    assert abs(sol.weights.sum() - 1) <= 1e-9


def test_estimate_examples():
    sol = solve_weights([(-1.0, 0.0), (1.0, 0.0)], VariogramParams(0, 5, 1), (0.0, 3.0))
    assert estimate(sol, [100, 200]) == pytest.approx(150)
    sol = solve_weights([(0.0, 0.0), (4.0, 1.0), (2.0, 7.0)], VariogramParams(0, 5, 1), (1.0, 1.0))
    assert estimate(sol, [9.0, 9.0, 9.0]) == pytest.approx(9.0)
    base = estimate(sol, [1.0, 5.0, 3.0])
    assert estimate(sol, [11.0, 15.0, 13.0]) == pytest.approx(base + 10)


def test_length_mismatch():
    sol = solve_weights([(0.0, 0.0), (4.0, 1.0)], VariogramParams(0, 5, 1), (1.0, 1.0))
    with pytest.raises(ValidationError):
        estimate(sol, [1.0])
    with pytest.raises(ValidationError):
        variance(sol, [1.0, 2.0, 3.0])


def test_exact_interpolation_at_sample():
    locs = [(0.0, 0.0), (7.0, 3.0), (2.0, 9.0)]
    p = VariogramParams(0, 20, 5)
    sol = solve_weights(locs, p, locs[1])
    _, _, g0 = dense_oracle(locs, p, locs[1])
    assert estimate(sol, [1.0, 2.0, 3.0]) == pytest.approx(2.0, abs=1e-8)
    assert variance(sol, g0) <= 1e-8


def test_far_target_variance_largest():
    rng = np.random.default_rng(3)
    locs = rng.uniform(0, 20, (10, 2))
    p = VariogramParams(1, 10, 5)
    system = KrigingSystem(locs, p)
    near = rng.uniform(0, 20, (50, 2))
    far = np.array([[500.0, 500.0], [-300.0, 200.0]])
    _, v_near = system.predict(np.zeros(10), near)
    _, v_far = system.predict(np.zeros(10), far)
    w, lam, g0 = dense_oracle(locs.tolist(), p, far[0])
    assert v_far[0] == pytest.approx(p.total_sill + lam, rel=1e-9)
    assert v_far.min() > v_near.max()


def test_translation_invariance(rng):
    locs = rng.uniform(0, 30, (6, 2))
    p = VariogramParams(0.3, 12, 2)
    t = np.array([13.0, 8.0])
    shift = np.array([1234.5, -987.25])
    a = solve_weights(locs, p, t).weights
    b = solve_weights(locs + shift, p, t + shift).weights
    assert np.allclose(a, b, atol=1e-10)


def test_duplicates_are_merged():
    p = VariogramParams(0, 10, 1)
    locs = [(0.0, 0.0), (0.0, 0.0), (5.0, 0.0)]
    sol = solve_weights(locs, p, (2.0, 0.0))
    merged = solve_weights([(0.0, 0.0), (5.0, 0.0)], p, (2.0, 0.0))
    assert sol.weights[0] == sol.weights[1] == pytest.approx(merged.weights[0] / 2)
    assert estimate(sol, [1.0, 3.0, 10.0]) == pytest.approx(estimate(merged, [2.0, 10.0]))


def test_singular_system():
    # zero sill and nugget: every semivariance is 0
    with pytest.raises(SingularMatrixError):
        solve_weights([(0.0, 0.0), (1.0, 0.0)], VariogramParams(0, 10, 0), (0.5, 0.5))


def test_non_finite_locations():
    with pytest.raises(ValidationError):
        solve_weights([(0.0, math.nan)], VariogramParams(0, 10, 1), (0, 0))


def test_clamp_variance():
    assert clamp_variance(-1e-12).item() == 0.0
    with pytest.raises(NegativeVarianceError, match="cell"):
        clamp_variance([1.0, -1.0], cells=["a", "b"])
    assert clamp_variance([-5.0], strict=False).tolist() == [0.0]


def test_lift_nugget_makes_system_well_posed():
    # a dense cluster plus distant points; the linear model is not a valid
    # variogram in 2-D so the conditional spectrum can go negative
    g = build_grid(60, 60, 2)
    xy = g.centers()[::7]
    p = VariogramParams(0, 40, 100)
    lifted = lift_nugget(xy, p, 0.02)
    assert lifted.range == p.range and lifted.sill == p.sill
    assert lifted.nugget >= p.nugget
    assert min_conditional_eigenvalue(xy, p) < 0
    assert min_conditional_eigenvalue(xy, lifted) >= 0.02 * p.total_sill - 1e-6
    ok = VariogramParams(50, 1, 1)
    assert lift_nugget([(0, 0), (10, 0)], ok) is ok


def test_krige_layer_single_sample(small_grid):
    m = krige_layer([(7.0, 3.0)], [42.0], VariogramParams(1, 20, 5), small_grid)
    vals = m.estimates[small_grid.reachable]
    assert np.allclose(vals, 42.0)
    assert np.isnan(m.estimates[3, 5])


def test_krige_layer_exact_at_sampled_cells(small_grid):
    cells = [(0, 0), (3, 2), (5, 0), (1, 3)]
    locs = [small_grid.cell_center(c) for c in cells]
    vals = [10.0, 20.0, 15.0, 12.0]
    m = krige_layer(locs, vals, VariogramParams(0, 15, 5), small_grid)
    for (i, j), v in zip(cells, vals):
        assert m.estimates[j, i] == pytest.approx(v, abs=1e-8)
        assert m.variances[j, i] <= 1e-8


def test_krige_layer_matches_cell_oracle():
    g = build_grid(15, 15, 5)
    locs = [(1.0, 2.0), (11.0, 9.0)]
    vals = [3.0, 8.0]
    p = VariogramParams(0.5, 12, 3)
    m = krige_layer(locs, vals, p, g)
    for i, j in g.reachable_cells():
        c = g.cell_center((i, j))
        w, lam, g0 = dense_oracle(locs, p, c)
        assert m.estimates[j, i] == pytest.approx(w @ vals, abs=1e-10)
        assert m.variances[j, i] == pytest.approx(max(w @ g0 + lam, 0), abs=1e-10)


def test_maps_are_read_only(small_grid):
    m = krige_layer([(7.0, 3.0)], [1.0], VariogramParams(1, 20, 5), small_grid)
    with pytest.raises(ValueError):
        m.estimates[0, 0] = 2


def _samples(grid, cells, values):
    return [Sample(k, grid.cell_center(c), v) for k, (c, v) in enumerate(zip(cells, values))]


def test_single_layer_mean_is_layer_variance(small_grid):
    s = _samples(small_grid, [(0, 0), (4, 2)], [[1.0], [2.0]])
    model = build_layered_model(s, small_grid, LayerSpec(1, 5.0), VariogramParams(0.1, 20, 2))
    assert np.array_equal(model.mean_kv_grid, model.layers[0].variances, equal_nan=True)
    assert model.mean_kv == pytest.approx(np.nanmean(model.layers[0].variances))


def test_layer_variances_average(small_grid):
    s = _samples(small_grid, [(0, 0), (4, 2), (2, 3)], [[1.0, 1.0], [2.0, 2.0], [3.0, 5.0]])
    p = VariogramParams(0.5, 20, 2)
    p3 = VariogramParams(1.5, 20, 6)  # scaling the variogram by 3 scales the variance by 3
    model = build_layered_model(s, small_grid, LayerSpec(2, 5.0), [p, p3])
    v = model.layers[0].variances
    assert np.allclose(model.layers[1].variances, 3 * v, equal_nan=True)
    assert np.allclose(model.mean_kv_grid, 2 * v, equal_nan=True)


def test_eight_layer_scalar_kv(small_grid, rng):
    cells = small_grid.reachable_cells()[::3]
    s = _samples(small_grid, cells, rng.uniform(100, 2000, (len(cells), 8)))
    params = [VariogramParams(10 * k, 15 + k, 100 + 20 * k) for k in range(8)]
    model = build_layered_model(s, small_grid, LayerSpec(8, 5.0), params)
    per_layer = [layer.mean_variance for layer in model.layers]
    assert model.mean_kv == pytest.approx(np.mean(per_layer), rel=1e-12)
    assert model.estimates.shape == (8, 4, 6)


def test_layer_count_mismatch(small_grid):
    s = _samples(small_grid, [(0, 0)], [[1.0, 2.0]])
    with pytest.raises(ValidationError):
        build_layered_model(s, small_grid, LayerSpec(3, 5.0), VariogramParams(1, 10, 1))
    with pytest.raises(ValidationError):
        build_layered_model([], small_grid, LayerSpec(2, 5.0), VariogramParams(1, 10, 1))


def test_variance_drops_at_new_sample(small_grid):
    p = VariogramParams(0, 15, 5)
    cells = [(0, 0), (4, 3)]
    s = _samples(small_grid, cells, [[1.0], [2.0]])
    before = build_layered_model(s, small_grid, LayerSpec(1, 5.0), p)
    assert before.mean_kv_grid[1, 2] > 1e-3
    s.append(Sample(9, small_grid.cell_center((2, 1)), [4.0]))
    after = build_layered_model(s, small_grid, LayerSpec(1, 5.0), p)
    assert after.mean_kv_grid[1, 2] <= 1e-8


def test_weights_do_not_depend_on_values(rng):
    locs = rng.uniform(0, 20, (5, 2))
    system = KrigingSystem(locs, VariogramParams(0.2, 10, 1))
    w1, _, _ = system.solve([(3.0, 3.0)])
    w2, _, _ = system.solve([(3.0, 3.0)])
    assert np.array_equal(w1, w2)
    e1, _ = system.predict(rng.normal(size=5), [(3.0, 3.0)])
    z = rng.normal(size=5)
    e2, _ = system.predict(z, [(3.0, 3.0)])
    assert e2[0] == pytest.approx(w1[:, 0] @ z)
