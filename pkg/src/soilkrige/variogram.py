"""Experimental semivariograms and the bounded linear variogram model.

The model used throughout is

    gamma(h) = 0                    for h == 0
    gamma(h) = p0 + p2 * h / p1     for 0 < h < p1
    gamma(h) = p0 + p2              for h >= p1

with nugget ``p0``, range ``p1`` and (partial) sill ``p2``. The nugget only
applies between distinct locations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InsufficientDataError, ValidationError
from .grid import locations_array


@dataclass(frozen=True)
class VariogramParams:
    """Nugget ``p0`` (kPa^2), range ``p1`` (m) and sill ``p2`` (kPa^2).

    ``degenerate`` is set by :func:`fit_linear` when the data carry no spatial
    structure (all-zero or flat semivariances); it is ignored in comparisons.
    """

    nugget: float
    range: float
    sill: float
    degenerate: bool = field(default=False, compare=False)

    def __post_init__(self):
        p0, p1, p2 = self.nugget, self.range, self.sill
        if not all(math.isfinite(v) for v in (p0, p1, p2)):
            raise ValidationError(f"variogram parameters must be finite, got {(p0, p1, p2)}")
        if p0 < 0 or p2 < 0 or p1 <= 0:
            raise ValidationError(
                f"need nugget >= 0, range > 0, sill >= 0; got {(p0, p1, p2)}"
            )

    @property
    def total_sill(self) -> float:
        return self.nugget + self.sill

    def astuple(self):
        return (self.nugget, self.range, self.sill)

    def __call__(self, h):
        return evaluate(self, h)


def evaluate(params: VariogramParams, h):
    """Semivariance at lag(s) ``h``; scalar in, scalar out."""
    arr = np.asarray(h, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValidationError("lag distances must be >= 0")
    g = params.nugget + params.sill * np.minimum(arr / params.range, 1.0)
    g = np.where(arr == 0, 0.0, g)
    return float(g) if g.ndim == 0 else g


# the name used by callers that mirror the operation list
eval = evaluate  # noqa: A001


class VariogramBin(NamedTuple):
    lag: float
    gamma: float
    pairs: int


@dataclass(frozen=True)
class ExperimentalVariogram:
    bins: tuple

    @property
    def lags(self) -> np.ndarray:
        return np.array([b.lag for b in self.bins])

    @property
    def gammas(self) -> np.ndarray:
        return np.array([b.gamma for b in self.bins])

    @property
    def pairs(self) -> np.ndarray:
        return np.array([b.pairs for b in self.bins], dtype=int)

    def __len__(self):
        return len(self.bins)


def experimental_semivariogram(locations, values, bin_width, max_lag) -> ExperimentalVariogram:
    """Matheron estimator ``gamma(h) = sum (z_i - z_j)^2 / (2 N(h))``.

    Pairs are binned by separation into ``[k*w, (k+1)*w)`` up to and
    including ``max_lag``. Each bin reports the mean pair distance as its
    lag; empty bins are dropped. Coincident pairs (distance 0) are skipped.
    """
    xy = locations_array(locations)
    z = np.asarray(values, dtype=float).ravel()
    if len(xy) != len(z):
        raise ValidationError(f"{len(xy)} locations but {len(z)} values")
    if len(z) < 2:
        raise InsufficientDataError("need at least 2 samples for a semivariogram")
    if not (bin_width > 0 and max_lag > 0):
        raise ValidationError("bin_width and max_lag must be > 0")

    iu, ju = np.triu_indices(len(z), k=1)
    d = np.hypot(xy[iu, 0] - xy[ju, 0], xy[iu, 1] - xy[ju, 1])
    sq = 0.5 * (z[iu] - z[ju]) ** 2
    keep = (d > 0) & (d <= max_lag)
    d, sq = d[keep], sq[keep]

    nbins = max(1, math.ceil(max_lag / bin_width - 1e-12))
    k = np.minimum(np.floor(d / bin_width).astype(int), nbins - 1)
    counts = np.bincount(k, minlength=nbins)
    dsum = np.bincount(k, weights=d, minlength=nbins)
    gsum = np.bincount(k, weights=sq, minlength=nbins)
    bins = tuple(
        VariogramBin(float(dsum[b] / counts[b]), float(gsum[b] / counts[b]), int(counts[b]))
        for b in range(nbins)
        if counts[b] > 0
    )
    return ExperimentalVariogram(bins)


def _nonneg_lsq2(f, g, w):
    """Weighted least squares of ``g ~ a + b*f`` with ``a, b >= 0``.

    Vectorized over rows: ``f`` has shape ``(K, B)``, ``g`` and ``w`` shape
    ``(B,)``. Returns ``(a, b, sse)`` arrays of length ``K``. The optimum of a
    convex quadratic over the quadrant is either the interior stationary point
    or the best of the two edge solutions.
    """
    sw = w.sum()
    swg = (w * g).sum()
    swgg = (w * g * g).sum()
    swf = f @ w
    swff = (f * f) @ w
    swfg = f @ (w * g)

    def sse(a, b):
        return swgg - 2 * a * swg - 2 * b * swfg + a * a * sw + 2 * a * b * swf + b * b * swff

    det = sw * swff - swf * swf
    with np.errstate(divide="ignore", invalid="ignore"):
        a_int = (swff * swg - swf * swfg) / det
        b_int = (sw * swfg - swf * swg) / det
    interior_ok = (np.abs(det) > 1e-12 * np.maximum(sw * swff, 1e-300)) & (a_int >= 0) & (b_int >= 0)

    # edge b = 0
    a0 = np.full_like(swf, max(swg / sw, 0.0))
    b0 = np.zeros_like(swf)
    # edge a = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        b1 = np.where(swff > 0, np.maximum(swfg / swff, 0.0), 0.0)
    a1 = np.zeros_like(swf)

    best_a, best_b, best = a0, b0, sse(a0, b0)
    a_int = np.where(interior_ok, a_int, 0.0)
    b_int = np.where(interior_ok, b_int, 0.0)
    s_int = np.where(interior_ok, sse(a_int, b_int), np.inf)
    for a, b, s in ((a1, b1, sse(a1, b1)), (a_int, b_int, s_int)):
        better = s < best
        best_a = np.where(better, a, best_a)
        best_b = np.where(better, b, best_b)
        best = np.where(better, s, best)
    return best_a, best_b, np.maximum(best, 0.0)


def weighted_sse(params: VariogramParams, ev: ExperimentalVariogram) -> float:
    """Pair-count weighted squared misfit of ``params`` to the bins."""
    resid = evaluate(params, ev.lags) - ev.gammas
    return float(np.sum(ev.pairs * resid**2))


def fit_linear(ev: ExperimentalVariogram, n_grid=256, n_refine=33, rtol=1e-10) -> VariogramParams:
    """Fit nugget, range and sill to an experimental variogram.

    Minimizes the pair-count weighted squared error. For a fixed range the
    model is linear in (nugget, sill), which is solved in closed form under
    non-negativity; the range is searched over ``(0, max lag]`` with a coarse
    grid (including every bin lag, where the objective has kinks) and then
    refined by repeatedly re-gridding the bracket around the best candidate
    until it is narrower than ``rtol * max lag``.

    Flat or all-zero semivariances give a pure-nugget fit with
    ``degenerate=True``.
    """
    if len(ev) < 3:
        raise InsufficientDataError(f"need at least 3 variogram bins, got {len(ev)}")
    h = ev.lags
    g = ev.gammas
    w = ev.pairs.astype(float)
    hmax = float(h.max())
    scale = float(np.max(np.abs(g)))
    if scale == 0:
        return VariogramParams(0.0, hmax, 0.0, degenerate=True)

    def profile(p1s):
        f = np.minimum(h[None, :] / p1s[:, None], 1.0)
        return _nonneg_lsq2(f, g, w)

    cand = np.unique(
        np.concatenate(
            [np.linspace(hmax / n_grid, hmax, n_grid), h, np.geomspace(hmax * 1e-3, hmax, 32)]
        )
    )
    s = profile(cand)[2]
    k = int(np.argmin(s))
    best_p1, best_s = float(cand[k]), float(s[k])
    lo = float(cand[k - 1]) if k > 0 else best_p1 * 0.5
    hi = float(cand[k + 1]) if k + 1 < len(cand) else best_p1
    while hi - lo > rtol * hmax:
        cand = np.linspace(lo, hi, n_refine)
        s = profile(cand)[2]
        k = int(np.argmin(s))
        if s[k] <= best_s:
            best_p1, best_s = float(cand[k]), float(s[k])
        step = cand[1] - cand[0]
        lo, hi = max(lo, best_p1 - step), min(hi, best_p1 + step)
    a, b, _ = profile(np.array([best_p1]))
    p0, p2 = float(a[0]), float(b[0])

    # no spatial structure across the observed lags: pure nugget
    if p2 <= 1e-9 * scale or best_p1 <= float(h.min()):
        return VariogramParams(float(np.sum(w * g) / np.sum(w)), hmax, 0.0, degenerate=True)
    return VariogramParams(p0, best_p1, p2)


def default_binning(grid):
    """Bin width of one cell and a max lag of half the grid diagonal."""
    return grid.cell_size, 0.5 * math.hypot(grid.width, grid.height)


def fit_samples(locations: Sequence, values, bin_width, max_lag) -> VariogramParams:
    """Experimental variogram followed by :func:`fit_linear`."""
    ev = experimental_semivariogram(locations, values, bin_width, max_lag)
    return fit_linear(ev)
