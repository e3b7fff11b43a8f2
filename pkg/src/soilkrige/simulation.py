"""Surrogate ground truth, simulated sampling runs and their metrics."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import (
    ExhaustedError,
    GenerationError,
    InsufficientDataError,
    SoilKrigeError,
    UndefinedCorrelationError,
    ValidationError,
)
from .exploration import (
    ADAPTIVE,
    AREA_COVERAGE,
    Plan,
    StrategyConfig,
    adapt_plan_greedy,
    adapt_plan_mc,
    initial_plan,
    next_greedy,
    next_monte_carlo,
)
from .grid import FieldGrid, LayerSpec, Location, Sample, build_grid, corner_mask
from .kriging import LayeredModel, build_layered_model, lift_nugget
from .variogram import VariogramParams, default_binning, evaluate, fit_samples

DEMO_SIZE = (233.0, 100.0)
DEMO_CELL = 5.0
DEMO_TREND = (450.0, 700.0, 950.0, 1150.0, 1300.0, 1400.0, 1450.0, 1500.0)
DEFAULT_PRIOR = VariogramParams(150.0, 60.0, 2500.0)


def demo_grid() -> FieldGrid:
    """233 m x 100 m field on a 5 m grid with a 2x2 corner cut: 936 cells."""
    nx = math.ceil(DEMO_SIZE[0] / DEMO_CELL)
    ny = math.ceil(DEMO_SIZE[1] / DEMO_CELL)
    return build_grid(*DEMO_SIZE, DEMO_CELL, mask=corner_mask(nx, ny, (2, 2)))


def demo_layer_params(m=8) -> list:
    """Per-layer variograms: ranges and sills grow slowly with depth."""
    return [VariogramParams(150.0, 50.0 + 5.0 * k, 2000.0 + 250.0 * k) for k in range(m)]


@dataclass(frozen=True, eq=False)
class SurrogateField:
    """Dense ground truth: ``truth`` has shape ``(m, ny, nx)``, NaN off-mask."""

    grid: FieldGrid
    truth: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.array(self.truth, dtype=float)
        if t.ndim != 3 or t.shape[1:] != self.grid.shape:
            raise ValidationError(f"truth shape {t.shape} does not match (m, {self.grid.shape})")
        if not np.all(np.isfinite(t[:, self.grid.reachable])):
            raise ValidationError("surrogate values must be finite on reachable cells")
        t[:, ~self.grid.reachable] = np.nan
        t.setflags(write=False)
        object.__setattr__(self, "truth", t)

    @property
    def layer_count(self) -> int:
        return self.truth.shape[0]

    def values_at(self, cell) -> np.ndarray:
        i, j = cell
        return self.truth[:, j, i].copy()

    def cell_values(self) -> np.ndarray:
        """``(m, n_reachable)`` truth values in row-major cell order."""
        return self.truth[:, self.grid.reachable]


def _grid_key(grid):
    return (tuple(grid.origin), grid.cell_size, grid.nx, grid.ny, grid.reachable.tobytes())


@functools.lru_cache(maxsize=64)
def _field_factor(grid_key, params_tuple, strict):
    origin, cs, nx, ny, mask_bytes = grid_key
    mask = np.frombuffer(mask_bytes, dtype=bool).reshape(ny, nx)
    grid = FieldGrid(Location(*origin), cs, nx, ny, mask)
    params = VariogramParams(*params_tuple)
    xy = grid.centers()
    d = np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])
    cov = params.total_sill - evaluate(params, d)
    if strict:
        jitter = 1e-8 * max(1.0, params.total_sill)
        try:
            return np.linalg.cholesky(cov + jitter * np.eye(len(cov)))
        except np.linalg.LinAlgError as exc:
            raise GenerationError(
                f"covariance of {params.astuple()} is not positive definite on this grid"
            ) from exc
    vals, vecs = np.linalg.eigh(cov)
    factor = vecs * np.sqrt(np.clip(vals, 0.0, None))
    # clipping adds variance; rescale rows so every cell keeps the total sill
    diag = np.einsum("ij,ij->i", factor, factor)
    return factor * np.sqrt(params.total_sill / np.maximum(diag, 1e-300))[:, None]


def generate_surrogate(
    grid: FieldGrid,
    spec: LayerSpec,
    layer_variograms,
    depth_trend,
    seed=None,
    strict=False,
) -> SurrogateField:
    """Gaussian random field per layer with the given variogram plus a trend.

    The covariance between cell centers is ``total_sill - gamma(h)``. The
    bounded linear variogram is not a valid covariance in two dimensions, so
    by default the matrix is projected onto the nearest positive
    semi-definite one (negative eigenvalues set to zero) and rescaled so each
    cell keeps a point variance of the total sill before sampling. With
    ``strict=True`` a jittered Cholesky factorization is used instead and an
    indefinite covariance raises :class:`GenerationError`.

    ``depth_trend[k]`` is added to layer ``k``; values are clamped at 0 kPa.
    """
    m = spec.count
    if isinstance(layer_variograms, VariogramParams):
        layer_variograms = [layer_variograms] * m
    layer_variograms = list(layer_variograms)
    trend = np.broadcast_to(np.asarray(depth_trend, dtype=float), (m,))
    if len(layer_variograms) != m:
        raise ValidationError(f"{len(layer_variograms)} variograms for {m} layers")
    rng = np.random.default_rng(seed)
    key = _grid_key(grid)
    truth = np.full((m,) + grid.shape, np.nan)
    for k, params in enumerate(layer_variograms):
        z = rng.standard_normal(grid.n_reachable)
        if params.total_sill == 0:
            vals = np.zeros(grid.n_reachable)
        else:
            vals = _field_factor(key, params.astuple(), bool(strict)) @ z
        truth[k][grid.reachable] = np.maximum(vals + trend[k], 0.0)
    return SurrogateField(
        grid,
        truth,
        {
            "mode": "synthetic",
            "seed": seed,
            "params": [p.astuple() for p in layer_variograms],
            "depth_trend": [float(v) for v in trend],
        },
    )


def demo_surrogate(seed=0, spec: Optional[LayerSpec] = None) -> SurrogateField:
    spec = spec or LayerSpec(8, 5.0)
    trend = [DEMO_TREND[min(k, len(DEMO_TREND) - 1)] for k in range(spec.count)]
    return generate_surrogate(demo_grid(), spec, demo_layer_params(spec.count), trend, seed)


def sample_at(field: SurrogateField, cell, noise_sd=0.0, rng=None, id=0) -> Sample:
    """Observe the surrogate at a cell center, optionally with Gaussian noise."""
    if not field.grid.is_reachable(cell):
        raise ValidationError(f"cell {cell} is not reachable")
    values = field.values_at(cell)
    if noise_sd:
        if noise_sd < 0:
            raise ValidationError("noise_sd must be >= 0")
        values = np.maximum(values + np.random.default_rng(rng).normal(0.0, noise_sd, len(values)), 0.0)
    return Sample(int(id), field.grid.cell_center(cell), values)


class ModelError(NamedTuple):
    mse: float
    rmse: float
    layer_mse: np.ndarray
    layer_rmse: np.ndarray


def _estimates(model):
    return model.estimates if isinstance(model, LayeredModel) else np.asarray(model, dtype=float)


def model_error(model, field: SurrogateField) -> ModelError:
    """Mean squared error against the truth over all reachable cells and layers."""
    est = _estimates(model)
    if est.shape != field.truth.shape:
        raise ValidationError(f"model shape {est.shape} does not match truth {field.truth.shape}")
    diff = (est - field.truth)[:, field.grid.reachable]
    layer = np.mean(diff**2, axis=1)
    total = float(np.mean(diff**2))
    return ModelError(total, math.sqrt(total), layer, np.sqrt(layer))


def mse(model, field: SurrogateField) -> float:
    return model_error(model, field).mse


def rmse(model, field: SurrogateField) -> float:
    return model_error(model, field).rmse


@dataclass(frozen=True)
class StepRecord:
    step: int
    sample_id: int
    cell: tuple
    x: float
    y: float
    path_m: float
    mse: float
    rmse: float
    kv: float


@dataclass(eq=False)
class RunRecord:
    """Trace of one exploration run.

    ``kv_vectors[t]`` and ``sq_error_vectors[t]`` hold, for every reachable
    cell after step ``t``, the layer-averaged kriging variance and squared
    model error.
    """

    strategy: StrategyConfig
    origin: Location
    steps: list = field(default_factory=list)
    kv_vectors: Optional[np.ndarray] = None
    sq_error_vectors: Optional[np.ndarray] = None
    final_model: Optional[LayeredModel] = None
    kv_grids: list = field(default_factory=list)

    @property
    def route(self) -> list:
        return [s.cell for s in self.steps]

    @property
    def path_m(self) -> float:
        return self.steps[-1].path_m if self.steps else 0.0

    @property
    def final_rmse(self) -> float:
        return self.steps[-1].rmse

    @property
    def final_kv(self) -> float:
        return self.steps[-1].kv


def layer_variograms(
    samples: Sequence[Sample],
    spec: LayerSpec,
    prior: VariogramParams,
    bin_width: float,
    max_lag: float,
    freeze=False,
) -> list:
    """Fit one variogram per layer, falling back to ``prior`` when unusable.

    The prior is used when frozen, below three samples, when too few lag bins
    exist, or when the fit shows no spatial structure.
    """
    if freeze or len(samples) < 3:
        return [prior] * spec.count
    locs = [s.location for s in samples]
    values = np.stack([s.layer_values for s in samples])
    out = []
    for k in range(spec.count):
        try:
            p = fit_samples(locs, values[:, k], bin_width, max_lag)
        except InsufficientDataError:
            p = prior
        out.append(prior if p.degenerate else p)
    return out


def fit_model(
    samples: Sequence[Sample],
    grid: FieldGrid,
    spec: LayerSpec,
    prior: VariogramParams = DEFAULT_PRIOR,
    bin_width=None,
    max_lag=None,
    freeze=False,
    nugget_floor=0.02,
    centers=None,
) -> LayeredModel:
    """Fit per-layer variograms and krige every layer over ``grid``.

    Each layer's variogram is passed through :func:`lift_nugget` with
    ``nugget_floor`` (0 disables it) so that the kriging system stays well
    posed, and any remaining negative variances are clamped to zero.
    """
    bw, ml = default_binning(grid)
    params = layer_variograms(samples, spec, prior, bin_width or bw, max_lag or ml, freeze)
    if nugget_floor:
        locs = [s.location for s in samples]
        lifted = {}
        for p in params:
            if p not in lifted:
                lifted[p] = lift_nugget(locs, p, nugget_floor)
        params = [lifted[p] for p in params]
    return build_layered_model(samples, grid, spec, params, centers=centers, strict=False)


def run_exploration(
    strategy: StrategyConfig,
    field: SurrogateField,
    spec: Optional[LayerSpec] = None,
    seed=None,
    *,
    origin=None,
    noise_sd=0.0,
    prior: VariogramParams = DEFAULT_PRIOR,
    freeze=False,
    bin_width=None,
    max_lag=None,
    keep_traces=True,
    keep_kv_grids=False,
    nugget_floor=0.02,
) -> RunRecord:
    """Simulate a sampling run of ``strategy.budget`` samples on ``field``.

    After every sample the layered model is rebuilt (variograms refitted
    unless ``freeze``) and scored against the truth. Area-coverage
    strategies follow their initial route, next-best-view strategies pick
    each target from the fresh KV grid and adaptive strategies edit their
    standing plan every step.

    Models are built with :func:`fit_model`.
    """
    spec = spec or LayerSpec(field.layer_count, 5.0)
    if spec.count != field.layer_count:
        raise ValidationError(f"layer spec has {spec.count} layers, surrogate {field.layer_count}")
    if strategy.budget < 3:
        raise ValidationError(f"budget must be >= 3 to fit a model, got {strategy.budget}")
    grid = field.grid
    seed = strategy.seed if seed is None else seed
    plan_rng, noise_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2))
    bw, ml = default_binning(grid)
    bin_width = bin_width or bw
    max_lag = max_lag or ml
    here = grid.origin if origin is None else Location(*map(float, origin))
    record = RunRecord(strategy, here)

    kind = strategy.kind
    plan = initial_plan(strategy, grid, here, plan_rng)
    kv_grid = grid.to_grid(np.ones(grid.n_reachable))
    centers = grid.centers()
    truth = field.cell_values()
    visited, samples, kv_rows, err_rows = [], [], [], []
    path = 0.0
    budget = min(strategy.budget, grid.n_reachable)

    for t in range(budget):
        try:
            if kind in AREA_COVERAGE:
                if t >= len(plan):
                    break
                cell = plan.route[t]
            elif kind in ADAPTIVE and len(plan):
                cell = plan.route[0]
            elif kind in ("greedy", "adaptive_greedy"):
                cell = next_greedy(kv_grid, visited)
            else:
                cell = next_monte_carlo(kv_grid, visited, strategy.candidate_count, plan_rng)
        except ExhaustedError:
            break

        target = grid.cell_center(cell)
        path += here.distance(target)
        here = target
        visited.append(cell)
        samples.append(sample_at(field, cell, noise_sd, noise_rng, id=t))

        try:
            model = fit_model(
                samples, grid, spec, prior, bin_width, max_lag, freeze, nugget_floor, centers
            )
        except SoilKrigeError as exc:
            raise type(exc)(f"step {t}: {exc}") from exc
        kv_grid = model.mean_kv_grid

        if kind in ADAPTIVE:
            remaining = tuple(c for c in plan.route if c != cell)
            if remaining:
                standing = Plan(remaining, here)
                if kind == "adaptive_greedy":
                    plan = adapt_plan_greedy(standing, kv_grid, grid, visited)
                else:
                    plan = adapt_plan_mc(
                        standing, kv_grid, grid, strategy.candidate_count, plan_rng, visited
                    )
            else:
                plan = Plan((), here)

        est = model.estimates[:, grid.reachable]
        sq = (est - truth) ** 2
        err = float(sq.mean())
        record.steps.append(
            StepRecord(t + 1, t, cell, here.x, here.y, path, err, math.sqrt(err), model.mean_kv)
        )
        if keep_traces:
            kv_rows.append(kv_grid[grid.reachable])
            err_rows.append(sq.mean(axis=0))
        if keep_kv_grids:
            record.kv_grids.append(kv_grid)
        record.final_model = model

    if keep_traces and kv_rows:
        record.kv_vectors = np.vstack(kv_rows)
        record.sq_error_vectors = np.vstack(err_rows)
    return record


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if len(x) != len(y):
        raise ValidationError(f"vectors differ in length: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise UndefinedCorrelationError("need at least 2 entries")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0 or sy == 0:
        raise UndefinedCorrelationError("correlation undefined for a constant vector")
    return float(np.clip((dx @ dy) / (sx * sy), -1.0, 1.0))


def kv_mse_correlation(record: RunRecord) -> float:
    """Pearson r between per-cell KV and squared error over all steps."""
    if record.kv_vectors is None:
        raise UndefinedCorrelationError("run was recorded without per-cell traces")
    return pearson(record.kv_vectors, record.sq_error_vectors)


@dataclass(frozen=True)
class ComparisonRow:
    strategy: str
    budget: int
    runs: int
    mean_rmse: float
    mean_path_m: float
    mean_kv: float


FieldSource = Union[SurrogateField, Callable[[int], SurrogateField]]


def compare_strategies(
    configs: Sequence[StrategyConfig],
    field: FieldSource,
    seeds: Sequence[int],
    budgets: Optional[Sequence[int]] = None,
    spec: Optional[LayerSpec] = None,
    **run_kwargs,
) -> list:
    """Mean final RMSE, path length and KV per strategy and budget over seeds.

    ``field`` is either a fixed surrogate or a callable mapping a seed to one,
    so the ground truth may be redrawn per seed. ``budgets`` defaults to each
    config's own budget.
    """
    if not configs:
        raise ValidationError("need at least one strategy")
    if not seeds:
        raise ValidationError("need at least one seed")
    run_kwargs.setdefault("keep_traces", False)
    rows = []
    for cfg in configs:
        for b in (budgets or [cfg.budget]):
            recs = []
            for s in seeds:
                fld = field(s) if callable(field) else field
                recs.append(run_exploration(replace(cfg, budget=int(b), seed=int(s)), fld, spec, **run_kwargs))
            rows.append(
                ComparisonRow(
                    cfg.kind,
                    int(b),
                    len(recs),
                    float(np.mean([r.final_rmse for r in recs])),
                    float(np.mean([r.path_m for r in recs])),
                    float(np.mean([r.final_kv for r in recs])),
                )
            )
    return rows


def pivot(rows: Sequence[ComparisonRow], metric="mean_rmse") -> dict:
    """``{strategy: {budget: value}}`` view shaped like a strategy-by-budget table."""
    out = {}
    for r in rows:
        out.setdefault(r.strategy, {})[r.budget] = getattr(r, metric)
    return out
