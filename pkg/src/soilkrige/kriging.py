"""Ordinary kriging in semivariance form.

For samples at ``x_1..x_n`` and a target ``x_0`` the weights solve::

    [ Gamma  1 ] [ w   ]   [ gamma_0 ]
    [ 1^T    0 ] [ lam ] = [ 1       ]

with ``Gamma_ij = gamma(|x_i - x_j|)`` and ``gamma_0i = gamma(|x_i - x_0|)``.
The estimate is ``w . z`` and the prediction variance
``sum_i w_i gamma_0i + lam``.

The augmented matrix only depends on sample geometry and the variogram, so it
is LU-factorized once per model and reused for every grid cell.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as spl
from scipy.linalg import lapack

from .errors import NegativeVarianceError, SingularMatrixError, ValidationError
from .grid import FieldGrid, LayerSpec, Sample, locations_array, pairwise_distances
from .variogram import VariogramParams, evaluate

NEG_VAR_TOL = 1e-9  # relative to max(1, total sill)
RCOND_MIN = 1e-15


@dataclass(frozen=True, eq=False)
class KrigingSolution:
    weights: np.ndarray
    lagrange: float


def _dedup(xy):
    """Unique rows of ``xy`` plus the inverse map and multiplicities."""
    uniq, inv, counts = np.unique(xy, axis=0, return_inverse=True, return_counts=True)
    return uniq, inv.ravel(), counts


class KrigingSystem:
    """Factorized kriging system for a fixed sample geometry and variogram.

    Samples sharing a location are merged before factorizing; their weights
    are split evenly afterwards, which is equivalent to kriging with the mean
    value at that location.
    """

    def __init__(self, locations, params: VariogramParams, distances=None):
        xy = locations_array(locations)
        if len(xy) == 0:
            raise ValidationError("kriging needs at least one sample")
        if not np.all(np.isfinite(xy)):
            raise ValidationError("sample locations must be finite")
        self.params = params
        self.locations = xy
        self.n = len(xy)
        self._uniq, self._inv, self._counts = _dedup(xy)
        u = len(self._uniq)
        if distances is not None and u == self.n:
            # np.unique sorts rows; remap the caller's matrix to that order
            order = np.empty(u, dtype=int)
            order[self._inv] = np.arange(self.n)
            d = distances[np.ix_(order, order)]
        else:
            d = pairwise_distances(self._uniq)
        a = np.empty((u + 1, u + 1))
        a[:u, :u] = evaluate(params, d)
        a[:u, u] = 1.0
        a[u, :u] = 1.0
        a[u, u] = 0.0
        anorm = np.abs(a).sum(axis=0).max()
        with warnings.catch_warnings():
            # exact singularity is reported below through the condition estimate
            warnings.simplefilter("ignore", spl.LinAlgWarning)
            self._lu, self._piv = spl.lu_factor(a, check_finite=False)
        rcond, info = lapack.dgecon(self._lu, anorm, norm="1")
        if info != 0 or not rcond > RCOND_MIN:
            raise SingularMatrixError(
                f"kriging system with {u} distinct locations is singular (rcond={rcond:.3g})"
            )
        self._scale = max(1.0, params.total_sill)

    def _solve_unique(self, gamma0_u):
        u = len(self._uniq)
        rhs = np.vstack([gamma0_u, np.ones((1, gamma0_u.shape[1]))])
        sol = spl.lu_solve((self._lu, self._piv), rhs, check_finite=False)
        return sol[:u], sol[u]

    def _expand(self, w_u):
        return w_u[self._inv] / self._counts[self._inv][:, None]

    def solve(self, targets, target_distances=None):
        """Weights ``(n, T)``, multipliers ``(T,)`` and semivariances ``(n, T)``."""
        t = locations_array(targets)
        if target_distances is None:
            d_u = pairwise_distances(self._uniq, t)
        else:
            d_u = _first_rows(target_distances, self._inv, len(self._uniq))
        g_u = evaluate(self.params, d_u)
        w_u, lam = self._solve_unique(g_u)
        return self._expand(w_u), lam, g_u[self._inv]

    def predict(self, values, targets, target_distances=None, labels=None, strict=True):
        """Estimates and clamped variances at ``targets``.

        ``values`` is ``(n,)`` or ``(n, L)`` for L value sets sharing the
        geometry; estimates are then ``(T, L)``.
        ``labels`` (one per target) identify the offending target when a
        variance is clearly negative. ``strict=False`` clamps instead.
        """
        z = np.asarray(values, dtype=float)
        single = z.ndim == 1
        z = z.reshape(len(z), -1) if z.ndim else z.reshape(1, 1)
        if len(z) != self.n:
            raise ValidationError(f"{self.n} samples but {len(z)} values")
        if target_distances is None:
            d_u = pairwise_distances(self._uniq, locations_array(targets))
        else:
            d_u = _first_rows(target_distances, self._inv, len(self._uniq))
        g_u = evaluate(self.params, d_u)
        w_u, lam = self._solve_unique(g_u)
        z_u = np.zeros((len(self._uniq), z.shape[1]))
        np.add.at(z_u, self._inv, z)
        z_u /= self._counts[:, None]
        est = w_u.T @ z_u
        var = np.einsum("ij,ij->j", w_u, g_u) + lam
        return (est[:, 0] if single else est), clamp_variance(var, self._scale, labels, strict)


def _first_rows(dist, inv, u):
    """Rows of ``dist`` (one per original sample) reordered to unique order."""
    first = np.empty(u, dtype=int)
    first[inv[::-1]] = np.arange(len(inv))[::-1]
    return dist[first]


def clamp_variance(var, scale=1.0, cells=None, strict=True):
    """Zero out round-off negatives; raise on anything clearly negative.

    With ``strict=False`` every negative value is clamped silently.
    """
    var = np.asarray(var, dtype=float)
    if not strict:
        return np.maximum(var, 0.0)
    tol = NEG_VAR_TOL * scale
    bad = var < -tol
    if np.any(bad):
        k = int(np.flatnonzero(np.atleast_1d(bad))[0])
        where = f" at cell {cells[k]}" if cells is not None else f" at target {k}"
        raise NegativeVarianceError(
            f"kriging variance {np.atleast_1d(var)[k]:.3g}{where} below tolerance -{tol:.3g}"
        )
    return np.maximum(var, 0.0)


def min_conditional_eigenvalue(locations, params: VariogramParams) -> float:
    """Smallest eigenvalue of ``-Gamma`` restricted to weights summing to zero.

    Ordinary kriging is well posed for a sample set only when this is
    positive. The bounded linear model does not guarantee it in two
    dimensions.
    """
    xy = np.unique(locations_array(locations), axis=0)
    n = len(xy)
    if n < 2:
        return np.inf
    m = -evaluate(params, pairwise_distances(xy))
    # Householder reflection mapping the ones vector onto -sqrt(n) e_1; its
    # trailing columns span the zero-sum subspace
    v = np.ones(n)
    v[0] += math.sqrt(n)
    h = np.eye(n) - 2.0 * np.outer(v, v) / (v @ v)
    q = h[:, 1:]
    return float(np.linalg.eigvalsh(q.T @ m @ q)[0])


def lift_nugget(locations, params: VariogramParams, floor=0.02) -> VariogramParams:
    """Raise the nugget just enough to make the kriging system well posed.

    Adding ``delta`` to the nugget shifts every conditional eigenvalue (see
    :func:`min_conditional_eigenvalue`) up by ``delta``; the nugget is raised
    until the smallest reaches ``floor`` times the incoming total sill. Predictions at sample
    locations are unaffected because the nugget only acts between distinct
    points. Returns ``params`` itself when no lift is needed.
    """
    target = floor * params.total_sill
    lam = min_conditional_eigenvalue(locations, params)
    if lam >= target:
        return params
    return replace(params, nugget=params.nugget + (target - lam))


def solve_weights(sample_locs, params: VariogramParams, target) -> KrigingSolution:
    """Kriging weights and Lagrange multiplier for a single target."""
    system = KrigingSystem(sample_locs, params)
    w, lam, _ = system.solve([target])
    return KrigingSolution(w[:, 0].copy(), float(lam[0]))


def estimate(sol: KrigingSolution, values) -> float:
    z = np.asarray(values, dtype=float).ravel()
    if len(z) != len(sol.weights):
        raise ValidationError(f"{len(sol.weights)} weights but {len(z)} values")
    return float(sol.weights @ z)


def variance(sol: KrigingSolution, gamma0, scale=1.0) -> float:
    """Prediction variance ``sum w_i gamma_0i + lam``, clamped at zero."""
    g = np.asarray(gamma0, dtype=float).ravel()
    if len(g) != len(sol.weights):
        raise ValidationError(f"{len(sol.weights)} weights but {len(g)} semivariances")
    return float(clamp_variance(sol.weights @ g + sol.lagrange, scale))


@dataclass(frozen=True, eq=False)
class LayerMap:
    """Estimates and variances on a ``(ny, nx)`` grid; NaN off the mask."""

    estimates: np.ndarray
    variances: np.ndarray
    params: VariogramParams
    sample_ids: tuple

    @property
    def mean_variance(self) -> float:
        return float(np.nanmean(self.variances))


@dataclass(frozen=True, eq=False)
class LayeredModel:
    layers: tuple
    mean_kv_grid: np.ndarray
    mean_kv: float

    @property
    def estimates(self) -> np.ndarray:
        """``(m, ny, nx)`` stack of layer estimates."""
        return np.stack([layer.estimates for layer in self.layers])

    @property
    def variances(self) -> np.ndarray:
        return np.stack([layer.variances for layer in self.layers])

    @property
    def params(self):
        return tuple(layer.params for layer in self.layers)


class _CellLabels:
    """Lazy ``index -> cell`` lookup used only when reporting errors."""

    def __init__(self, grid):
        self._flat = grid.reachable_flat()
        self._grid = grid

    def __getitem__(self, k):
        return self._grid.unflat(self._flat[k])


def _readonly(a):
    a.setflags(write=False)
    return a


def _krige_cells(locs, values, params, grid, centers, d_ss=None, d_sc=None, strict=True):
    try:
        system = KrigingSystem(locs, params, distances=d_ss)
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"{exc} (grid {grid.nx}x{grid.ny})") from exc
    return system.predict(values, centers, target_distances=d_sc, labels=_CellLabels(grid), strict=strict)


def krige_layer(
    locations, values, params: VariogramParams, grid: FieldGrid, sample_ids=(), strict=True
) -> LayerMap:
    """Estimate and variance at every reachable cell center.

    Every sample takes part in every prediction (global neighbourhood).
    The bounded linear variogram is not conditionally negative definite in
    two dimensions, so some geometries yield clearly negative variances;
    these raise :class:`NegativeVarianceError` unless ``strict=False``, which
    clamps them to zero.
    """
    locs = locations_array(locations)
    centers = grid.centers()
    est, var = _krige_cells(locs, values, params, grid, centers, strict=strict)
    return LayerMap(
        _readonly(grid.to_grid(est)),
        _readonly(grid.to_grid(var)),
        params,
        tuple(sample_ids),
    )


def build_layered_model(
    samples: Sequence[Sample],
    grid: FieldGrid,
    spec: LayerSpec,
    params_per_layer,
    centers: Optional[np.ndarray] = None,
    strict=True,
) -> LayeredModel:
    """Krige each depth layer separately and average their variances.

    ``params_per_layer`` is a sequence of ``spec.count`` variogram parameter
    sets, or a single set used for all layers. The mean kriging variance grid
    is the per-cell average of the layer variances and ``mean_kv`` its mean
    over reachable cells. ``strict`` is passed on to the variance clamp as
    in :func:`krige_layer`.
    """
    if len(samples) == 0:
        raise ValidationError("need at least one sample to build a model")
    m = spec.count
    if isinstance(params_per_layer, VariogramParams):
        params_per_layer = [params_per_layer] * m
    params_per_layer = list(params_per_layer)
    if len(params_per_layer) != m:
        raise ValidationError(f"{len(params_per_layer)} variogram sets for {m} layers")
    for s in samples:
        if len(s.layer_values) != m:
            raise ValidationError(f"sample {s.id} has {len(s.layer_values)} layers, expected {m}")

    locs = locations_array([s.location for s in samples])
    values = np.stack([s.layer_values for s in samples])
    ids = tuple(s.id for s in samples)
    if centers is None:
        centers = grid.centers()
    d_ss = pairwise_distances(locs)
    d_sc = pairwise_distances(locs, centers)

    # layers sharing a variogram share one factorization and solve
    groups = {}
    for k, p in enumerate(params_per_layer):
        groups.setdefault(p.astuple(), []).append(k)
    results = [None] * m
    for ks in groups.values():
        est, var = _krige_cells(
            locs, values[:, ks], params_per_layer[ks[0]], grid, centers, d_ss, d_sc, strict
        )
        for col, k in enumerate(ks):
            results[k] = (est[:, col], var)

    layers = []
    var_sum = np.zeros(len(centers))
    for k in range(m):
        est, var = results[k]
        var_sum += var
        layers.append(
            LayerMap(
                _readonly(grid.to_grid(est)),
                _readonly(grid.to_grid(var)),
                params_per_layer[k],
                ids,
            )
        )
    mean_cells = var_sum / m
    return LayeredModel(tuple(layers), _readonly(grid.to_grid(mean_cells)), float(mean_cells.mean()))
