"""Run configuration, CSV formats and model comparison reports.

The run configuration is a YAML document::

    field:
      width_m: 233
      height_m: 100
      cell_size_m: 5          # default 5
      mask_path: mask.csv     # optional, 1/0 grid, one row per y-index
    layers: {count: 8, thickness_cm: 5, profile_step_cm: null}
    variogram:
      bin_width_m: null       # default one cell
      max_lag_m: null         # default half the field diagonal
      prior: {p0: 150, p1: 60, p2: 2500}
      freeze: false
      nugget_floor: 0.02
    surrogate:
      mode: synthetic         # or "load" with path: <dir of truth_k.csv>
      seed: 0                 # null redraws the field for every run seed
      params: null            # list of {p0, p1, p2}, one per layer
      depth_trend: null       # kPa offset per layer
    strategies: [random, w_shape, {kind: monte_carlo, candidate_count: 50}]
    budgets: [15, 20, 30, 50]
    seeds: [0, 1, 2, 3, 4]
    noise_sd_kpa: 0
    origin: null              # robot start [x, y]; default the field origin

Relative paths are resolved against the directory of the config file.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import yaml

from .errors import ConfigError, DivisionGuardError, SchemaError, ValidationError
from .exploration import KINDS, Plan, StrategyConfig
from .grid import DepthProfile, FieldGrid, LayerSpec, Sample, aggregate_layers, build_grid
from .kriging import LayeredModel
from .simulation import (
    DEFAULT_PRIOR,
    DEMO_TREND,
    ComparisonRow,
    RunRecord,
    SurrogateField,
    demo_layer_params,
    generate_surrogate,
)
from .variogram import ExperimentalVariogram, VariogramParams

DEFAULT_BUDGETS = (15, 20, 30, 50)
DEFAULT_SEEDS = (0, 1, 2, 3, 4)
FLOAT_FMT = ".9g"


# -- configuration -----------------------------------------------------------


@dataclass(frozen=True)
class FieldConfig:
    width_m: float
    height_m: float
    cell_size_m: float = 5.0
    mask_path: Optional[Path] = None


@dataclass(frozen=True)
class VariogramConfig:
    bin_width_m: Optional[float] = None
    max_lag_m: Optional[float] = None
    prior: VariogramParams = DEFAULT_PRIOR
    freeze: bool = False
    nugget_floor: float = 0.02


@dataclass(frozen=True)
class SurrogateConfig:
    mode: str = "synthetic"
    seed: Optional[int] = 0
    params: Optional[tuple] = None
    depth_trend: Optional[tuple] = None
    path: Optional[Path] = None


@dataclass(frozen=True)
class RunConfig:
    field: FieldConfig
    layers: LayerSpec = LayerSpec()
    profile_step_cm: Optional[float] = None
    variogram: VariogramConfig = VariogramConfig()
    surrogate: SurrogateConfig = SurrogateConfig()
    strategies: tuple = tuple(StrategyConfig(k) for k in KINDS)
    budgets: tuple = DEFAULT_BUDGETS
    seeds: tuple = DEFAULT_SEEDS
    noise_sd_kpa: float = 0.0
    origin: Optional[tuple] = None

    def grid(self) -> FieldGrid:
        f = self.field
        mask = None
        if f.mask_path is not None:
            mask = load_grid_csv(f.mask_path)
            if not np.all(np.isin(mask[np.isfinite(mask)], (0.0, 1.0))):
                raise ConfigError("mask cells must be 0 or 1", "field.mask_path")
            mask = np.nan_to_num(mask, nan=0.0).astype(bool)
        try:
            return build_grid(f.width_m, f.height_m, f.cell_size_m, mask=mask)
        except ValidationError as exc:
            raise ConfigError(str(exc), "field.mask_path" if mask is not None else "field") from exc

    def bin_width(self, grid: FieldGrid) -> float:
        return self.variogram.bin_width_m or grid.cell_size

    def max_lag(self, grid: FieldGrid) -> float:
        return self.variogram.max_lag_m or 0.5 * math.hypot(grid.width, grid.height)

    def run_kwargs(self) -> dict:
        """Keyword arguments for :func:`~soilkrige.simulation.run_exploration`."""
        v = self.variogram
        return dict(
            origin=self.origin,
            noise_sd=self.noise_sd_kpa,
            prior=v.prior,
            freeze=v.freeze,
            bin_width=v.bin_width_m,
            max_lag=v.max_lag_m,
            nugget_floor=v.nugget_floor,
        )

    def surrogate_for(self, run_seed=None, grid=None) -> SurrogateField:
        """Ground truth for a run; redrawn per run seed when ``surrogate.seed`` is null."""
        grid = grid or self.grid()
        s = self.surrogate
        if s.mode == "load":
            return load_surrogate(s.path, grid, self.layers)
        m = self.layers.count
        params = list(s.params) if s.params else demo_layer_params(m)
        trend = s.depth_trend if s.depth_trend else [DEMO_TREND[min(k, len(DEMO_TREND) - 1)] for k in range(m)]
        seed = run_seed if s.seed is None else s.seed
        return generate_surrogate(grid, self.layers, params, trend, seed)


_SCHEMA = {
    "field": {"width_m", "height_m", "cell_size_m", "mask_path"},
    "layers": {"count", "thickness_cm", "profile_step_cm"},
    "variogram": {"bin_width_m", "max_lag_m", "prior", "freeze", "nugget_floor"},
    "surrogate": {"mode", "seed", "params", "depth_trend", "path"},
    "strategies": None,
    "budgets": None,
    "seeds": None,
    "noise_sd_kpa": None,
    "origin": None,
}


def _key_lines(node, prefix="", out=None):
    """Map dotted key paths to 1-based source lines."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = f"{prefix}.{k.value}" if prefix else str(k.value)
            out[path] = k.start_mark.line + 1
            _key_lines(v, path, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            path = f"{prefix}[{i}]"
            out[path] = v.start_mark.line + 1
            _key_lines(v, path, out)
    return out


class _Reader:
    """Typed access to the parsed document with field-named errors."""

    def __init__(self, data, lines, base: Path):
        self.data = data
        self.lines = lines
        self.base = base

    def fail(self, name, msg):
        line = self.lines.get(name)
        if line is None and "." in name:
            line = self.lines.get(name.rsplit(".", 1)[0])
        raise ConfigError(msg, name, line)

    def get(self, name, default=None):
        cur = self.data
        for part in name.split("."):
            if not isinstance(cur, dict) or part not in cur or cur[part] is None:
                return default
            cur = cur[part]
        return cur

    def number(self, name, default=None, positive=False, nonneg=False, integer=False):
        v = self.get(name, default)
        if v is None:
            return None
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(name, f"expected a number, got {v!r}")
        if not math.isfinite(v):
            self.fail(name, f"must be finite, got {v}")
        if integer and int(v) != v:
            self.fail(name, f"must be an integer, got {v}")
        if positive and not v > 0:
            self.fail(name, f"must be > 0, got {v}")
        if nonneg and v < 0:
            self.fail(name, f"must be >= 0, got {v}")
        return int(v) if integer else float(v)

    def flag(self, name, default=False):
        v = self.get(name, default)
        if not isinstance(v, bool):
            self.fail(name, f"expected true or false, got {v!r}")
        return v

    def path(self, name):
        v = self.get(name)
        if v is None:
            return None
        p = Path(str(v))
        if not p.is_absolute():
            p = self.base / p
        if not p.exists():
            self.fail(name, f"path does not exist: {p}")
        return p

    def params(self, name, node=None):
        node = self.get(name) if node is None else node
        if not isinstance(node, dict) or set(node) != {"p0", "p1", "p2"}:
            self.fail(name, "expected a mapping with keys p0, p1, p2")
        vals = []
        for k in ("p0", "p1", "p2"):
            v = node[k]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                self.fail(f"{name}.{k}", f"expected a number, got {v!r}")
            vals.append(float(v))
        try:
            return VariogramParams(*vals)
        except ValidationError as exc:
            self.fail(name, str(exc))

    def int_list(self, name, default, minimum):
        v = self.get(name)
        if v is None:
            return tuple(default)
        if not isinstance(v, list) or not v:
            self.fail(name, "expected a non-empty list")
        out = []
        for i, x in enumerate(v):
            if isinstance(x, bool) or not isinstance(x, int) or x < minimum:
                self.fail(f"{name}[{i}]", f"expected an integer >= {minimum}, got {x!r}")
            out.append(int(x))
        return tuple(out)


def _check_keys(r: _Reader):
    if not isinstance(r.data, dict):
        raise ConfigError("top level must be a mapping", line=1)
    for key, value in r.data.items():
        if key not in _SCHEMA:
            r.fail(str(key), f"unknown key; expected one of {sorted(_SCHEMA)}")
        allowed = _SCHEMA[key]
        if allowed is None:
            continue
        if value is None:
            continue
        if not isinstance(value, dict):
            r.fail(key, "expected a mapping")
        for sub in value:
            if sub not in allowed:
                r.fail(f"{key}.{sub}", f"unknown key; expected one of {sorted(allowed)}")


def _strategies(r: _Reader):
    raw = r.get("strategies")
    if raw is None:
        return tuple(StrategyConfig(k) for k in KINDS)
    if not isinstance(raw, list) or not raw:
        r.fail("strategies", "expected a non-empty list")
    out = []
    for i, item in enumerate(raw):
        name = f"strategies[{i}]"
        if isinstance(item, str):
            item = {"kind": item}
        if not isinstance(item, dict) or "kind" not in item:
            r.fail(name, "expected a strategy name or a mapping with 'kind'")
        extra = set(item) - {"kind", "candidate_count", "initial_plan_kind"}
        if extra:
            r.fail(f"{name}.{sorted(extra)[0]}", "unknown strategy key")
        try:
            out.append(StrategyConfig(**item))
        except (ValidationError, TypeError) as exc:
            r.fail(name, str(exc))
    return tuple(out)


def parse_config(text: str, base=".") -> RunConfig:
    """Parse and validate a configuration document.

    Either a complete :class:`RunConfig` is returned or :class:`ConfigError`
    is raised; nothing is applied partially.
    """
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"cannot parse config: {getattr(exc, 'problem', exc)}", line=line) from exc
    r = _Reader(data if data is not None else {}, _key_lines(node) if node else {}, Path(base))
    _check_keys(r)

    if r.get("field") is None:
        r.fail("field", "missing required section")
    fc = FieldConfig(
        r.number("field.width_m", positive=True) or r.fail("field.width_m", "required"),
        r.number("field.height_m", positive=True) or r.fail("field.height_m", "required"),
        r.number("field.cell_size_m", 5.0, positive=True),
        r.path("field.mask_path"),
    )
    layers = LayerSpec(
        r.number("layers.count", 8, positive=True, integer=True),
        r.number("layers.thickness_cm", 5.0, positive=True),
    )
    step = r.number("layers.profile_step_cm", None, positive=True)

    prior = r.params("variogram.prior") if r.get("variogram.prior") is not None else DEFAULT_PRIOR
    vc = VariogramConfig(
        r.number("variogram.bin_width_m", None, positive=True),
        r.number("variogram.max_lag_m", None, positive=True),
        prior,
        r.flag("variogram.freeze", False),
        r.number("variogram.nugget_floor", 0.02, nonneg=True),
    )

    mode = r.get("surrogate.mode", "synthetic")
    if mode not in ("synthetic", "load"):
        r.fail("surrogate.mode", f"expected 'synthetic' or 'load', got {mode!r}")
    seed = r.get("surrogate.seed", None) if "seed" in (r.get("surrogate") or {}) else 0
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int) or seed < 0):
        r.fail("surrogate.seed", f"expected a non-negative integer or null, got {seed!r}")
    params = None
    raw = r.get("surrogate.params")
    if raw is not None:
        if not isinstance(raw, list) or len(raw) != layers.count:
            r.fail("surrogate.params", f"expected a list of {layers.count} variograms")
        params = tuple(r.params(f"surrogate.params[{i}]", p) for i, p in enumerate(raw))
    trend = r.get("surrogate.depth_trend")
    if trend is not None:
        if (
            not isinstance(trend, list)
            or len(trend) != layers.count
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in trend)
        ):
            r.fail("surrogate.depth_trend", f"expected a list of {layers.count} numbers")
        trend = tuple(float(v) for v in trend)
    spath = r.path("surrogate.path")
    if mode == "load" and spath is None:
        r.fail("surrogate.path", "required when mode is 'load'")
    sc = SurrogateConfig(mode, seed, params, trend, spath)

    origin = r.get("origin")
    if origin is not None:
        if (
            not isinstance(origin, list)
            or len(origin) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in origin)
        ):
            r.fail("origin", "expected [x, y] in meters")
        origin = (float(origin[0]), float(origin[1]))

    return RunConfig(
        fc,
        layers,
        step,
        vc,
        sc,
        _strategies(r),
        r.int_list("budgets", DEFAULT_BUDGETS, 3),
        r.int_list("seeds", DEFAULT_SEEDS, 0),
        r.number("noise_sd_kpa", 0.0, nonneg=True),
        origin,
    )


def load_config(path) -> RunConfig:
    """Read a YAML run configuration; a missing file raises FileNotFoundError."""
    path = Path(path)
    text = path.read_text()
    return parse_config(text, base=path.parent)


# -- number formatting -------------------------------------------------------


def fmt(v) -> str:
    """Fixed 9-significant-digit rendering used by all report writers."""
    return format(float(v), FLOAT_FMT)


def fmt_exact(v) -> str:
    """Shortest text that parses back to the identical double."""
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


# -- samples -----------------------------------------------------------------


def load_samples_csv(path, spec: Optional[LayerSpec] = None, depth_step=None) -> list:
    """Read samples from ``id,x_m,y_m,v0..`` or ``id,x_m,y_m,d0..`` CSV.

    Pre-aggregated files need exactly ``spec.count`` value columns (any
    count when ``spec`` is None). Raw
    profile rows are aggregated with :func:`aggregate_layers` using
    ``depth_step`` (cm). Errors name the 1-based line of the offending row.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file, header row required")
    header = [h.strip() for h in rows[0]]
    if header[:3] != ["id", "x_m", "y_m"] or len(header) < 4:
        raise SchemaError(f"{path}: header must start with id,x_m,y_m followed by value columns")
    cols = header[3:]
    prefix = cols[0][:1]
    if prefix not in ("v", "d") or cols != [f"{prefix}{k}" for k in range(len(cols))]:
        raise SchemaError(f"{path}: value columns must be v0..v{{m-1}} or d0..d{{K-1}}")
    raw = prefix == "d"
    if raw and not (depth_step and depth_step > 0):
        raise ValidationError(f"{path}: raw profile columns need a positive depth step")
    if raw and spec is None:
        spec = LayerSpec()
    if not raw and spec is not None and len(cols) != spec.count:
        raise SchemaError(f"{path}: {len(cols)} layer columns but {spec.count} layers configured")

    samples, seen = [], set()
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise SchemaError(f"{path}: line {lineno}: {len(row)} fields, header has {len(header)}")
        try:
            sid = int(row[0])
            x, y = float(row[1]), float(row[2])
            vals = np.array([float(c) for c in row[3:]])
        except ValueError as exc:
            raise ValidationError(f"{path}: line {lineno}: {exc}") from exc
        if sid in seen:
            raise ValidationError(f"{path}: line {lineno}: duplicate sample id {sid}")
        seen.add(sid)
        try:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValidationError("coordinates must be finite")
            if np.any(vals < 0):
                raise ValidationError("compaction values must be >= 0 kPa")
            if raw:
                profile = DepthProfile(vals, depth_step)
                samples.append(Sample(sid, (x, y), aggregate_layers(profile, spec), profile))
            else:
                samples.append(Sample(sid, (x, y), vals))
        except ValidationError as exc:
            raise ValidationError(f"{path}: line {lineno}: {exc}") from exc
    if not samples:
        raise ValidationError(f"{path}: no sample rows")
    return samples


def write_samples_csv(samples: Sequence[Sample], path):
    m = len(samples[0].layer_values)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "x_m", "y_m"] + [f"v{k}" for k in range(m)])
        for s in samples:
            w.writerow([s.id, fmt_exact(s.location.x), fmt_exact(s.location.y)] + [fmt_exact(v) for v in s.layer_values])


# -- grids -------------------------------------------------------------------


def export_grid_csv(values, path):
    """Write a ``(ny, nx)`` grid, one row per y-index, NaN as empty fields.

    Finite values use the shortest round-trip representation so
    :func:`load_grid_csv` reads back the identical doubles.
    """
    a = np.asarray(values, dtype=float)
    if a.ndim != 2:
        raise ValidationError(f"expected a 2-D grid, got shape {a.shape}")
    with open(path, "w", newline="") as fh:
        for row in a:
            fh.write(",".join("" if math.isnan(v) else fmt_exact(v) for v in row) + "\n")


def load_grid_csv(path) -> np.ndarray:
    """Read a grid written by :func:`export_grid_csv`; empty fields become NaN."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                rows.append([float(c) if c.strip() else math.nan for c in row])
            except ValueError as exc:
                raise ValidationError(f"{path}: line {lineno}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: empty grid")
    if len({len(r) for r in rows}) != 1:
        raise SchemaError(f"{path}: rows have differing lengths")
    return np.array(rows)


def export_model(model: LayeredModel, out_dir):
    """``estimate_k.csv`` and ``variance_k.csv`` per layer plus ``mean_kv.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for k, layer in enumerate(model.layers):
        export_grid_csv(layer.estimates, out / f"estimate_{k}.csv")
        export_grid_csv(layer.variances, out / f"variance_{k}.csv")
    export_grid_csv(model.mean_kv_grid, out / "mean_kv.csv")


def load_layer_stack(directory, prefix="estimate", count=None) -> np.ndarray:
    """Stack ``{prefix}_0.csv, {prefix}_1.csv, ...`` into an ``(m, ny, nx)`` array."""
    d = Path(directory)
    if count is None:
        count = 0
        while (d / f"{prefix}_{count}.csv").exists():
            count += 1
        if count == 0:
            raise FileNotFoundError(f"no {prefix}_0.csv in {d}")
    return np.stack([load_grid_csv(d / f"{prefix}_{k}.csv") for k in range(count)])


def save_surrogate(field: SurrogateField, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for k in range(field.layer_count):
        export_grid_csv(field.truth[k], out / f"truth_{k}.csv")
    with open(out / "provenance.yaml", "w") as fh:
        yaml.safe_dump(field.provenance, fh, sort_keys=True)


def load_surrogate(directory, grid: FieldGrid, spec: LayerSpec) -> SurrogateField:
    """Dense ground truth from ``truth_0.csv .. truth_{m-1}.csv``.

    Every reachable cell of ``grid`` must hold a value; masked cells are
    ignored.
    """
    stack = load_layer_stack(directory, "truth", spec.count)
    if stack.shape[1:] != grid.shape:
        raise SchemaError(f"surrogate grids are {stack.shape[1:]}, field grid is {grid.shape}")
    if np.isnan(stack[:, grid.reachable]).any():
        raise SchemaError(f"{directory}: surrogate has empty fields at reachable cells")
    return SurrogateField(grid, stack, {"mode": "loaded", "path": str(directory)})


# -- tables ------------------------------------------------------------------


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def export_plan_csv(plan: Plan, grid: FieldGrid, path):
    rows = []
    for n, c in enumerate(plan.route):
        p = grid.cell_center(c)
        rows.append([n, c[0], c[1], fmt(p.x), fmt(p.y)])
    _write_rows(path, ["order", "cell_i", "cell_j", "x_m", "y_m"], rows)


def write_variogram_csv(ev: ExperimentalVariogram, path):
    _write_rows(path, ["lag_m", "gamma", "pairs"], [[fmt(b.lag), fmt(b.gamma), b.pairs] for b in ev.bins])


def write_run_csv(record: RunRecord, path):
    rows = [
        [s.step, s.sample_id, fmt(s.x), fmt(s.y), fmt(s.path_m), fmt(s.mse), fmt(s.rmse), fmt(s.kv)]
        for s in record.steps
    ]
    _write_rows(path, ["step", "sample_id", "x", "y", "path_m", "mse", "rmse", "kv"], rows)


def write_comparison_csv(rows: Sequence[ComparisonRow], path):
    """Long form: one line per strategy and budget."""
    _write_rows(
        path,
        ["strategy", "budget", "runs", "mean_rmse", "mean_path_m", "mean_kv"],
        [[r.strategy, r.budget, r.runs, fmt(r.mean_rmse), fmt(r.mean_path_m), fmt(r.mean_kv)] for r in rows],
    )


def write_pivot_csv(rows: Sequence[ComparisonRow], metric, path):
    """Strategy-by-budget table, budgets in descending order as columns."""
    budgets = sorted({r.budget for r in rows}, reverse=True)
    table = {}
    for r in rows:
        table.setdefault(r.strategy, {})[r.budget] = getattr(r, metric)
    out = []
    for name, by_budget in table.items():
        out.append([name] + [fmt(by_budget[b]) if b in by_budget else "" for b in budgets])
    _write_rows(path, ["strategy"] + [str(b) for b in budgets], out)


# -- reports -----------------------------------------------------------------


@dataclass(frozen=True)
class NrmseRow:
    layer: int
    rmse: float
    mean: float
    nrmse: float


def _stack(model):
    if isinstance(model, LayeredModel):
        return model.estimates
    if isinstance(model, SurrogateField):
        return model.truth
    return np.asarray(model, dtype=float)


def normalized_rmse_report(model_a, model_b) -> list:
    """Per-layer RMSE between two models divided by the layer mean of ``model_a``.

    Models are :class:`LayeredModel`, :class:`SurrogateField` or ``(m, ny, nx)``
    arrays on the same grid; cells that are NaN in either are skipped.
    """
    a, b = _stack(model_a), _stack(model_b)
    if a.shape != b.shape or a.ndim != 3:
        raise ValidationError(f"model shapes differ or are not (m, ny, nx): {a.shape} vs {b.shape}")
    rows = []
    for k in range(a.shape[0]):
        ok = np.isfinite(a[k]) & np.isfinite(b[k])
        if not ok.any():
            raise ValidationError(f"layer {k} has no cell defined in both models")
        rmse = math.sqrt(float(np.mean((a[k][ok] - b[k][ok]) ** 2)))
        mean = float(np.mean(a[k][ok]))
        if mean == 0:
            raise DivisionGuardError(f"layer {k}: mean of the reference model is 0")
        rows.append(NrmseRow(k, rmse, mean, rmse / mean))
    return rows


def write_nrmse_csv(rows: Sequence[NrmseRow], path_or_file):
    header = ["layer", "rmse", "mean", "nrmse"]
    body = [[r.layer, fmt(r.rmse), fmt(r.mean), fmt(r.nrmse)] for r in rows]
    if hasattr(path_or_file, "write"):
        w = csv.writer(path_or_file, lineterminator="\n")
        w.writerow(header)
        w.writerows(body)
    else:
        _write_rows(path_or_file, header, body)
