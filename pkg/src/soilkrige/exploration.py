"""Sampling strategies and open-path TSP routing over a field grid.

Three families are provided:

* area coverage (``random``, ``w_shape``, ``area_split``): all targets are
  chosen up front and visited along a short route;
* next-best-view (``greedy``, ``monte_carlo``): one target at a time, picked
  from the current mean kriging-variance grid;
* adaptive (``adaptive_greedy``, ``adaptive_mc``): a standing plan that is
  edited after every model update and re-routed.

KV grids are ``(ny, nx)`` arrays with NaN at unreachable cells. Ties are
always broken towards the lowest ``(j, i)`` cell, i.e. row-major order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import ExhaustedError, ValidationError
from .grid import FieldGrid, Location

KINDS = (
    "random",
    "w_shape",
    "area_split",
    "greedy",
    "monte_carlo",
    "adaptive_greedy",
    "adaptive_mc",
)
AREA_COVERAGE = ("random", "w_shape", "area_split")
NBV = ("greedy", "monte_carlo")
ADAPTIVE = ("adaptive_greedy", "adaptive_mc")


@dataclass(frozen=True)
class StrategyConfig:
    kind: str
    budget: int = 50
    seed: int = 0
    candidate_count: int = 50
    initial_plan_kind: str = "area_split"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown strategy kind {self.kind!r}; expected one of {KINDS}")
        if int(self.budget) != self.budget or self.budget < 1:
            raise ValidationError(f"budget must be an integer >= 1, got {self.budget}")
        if self.kind in ("monte_carlo", "adaptive_mc") and self.candidate_count < 2:
            raise ValidationError(f"candidate_count must be >= 2, got {self.candidate_count}")
        if self.initial_plan_kind not in ("random", "area_split"):
            raise ValidationError(
                f"initial_plan_kind must be 'random' or 'area_split', got {self.initial_plan_kind!r}"
            )

    @property
    def label(self) -> str:
        return self.kind


@dataclass(frozen=True)
class Plan:
    """Ordered target cells and the location the route starts from."""

    route: tuple
    origin: Location = field(default=Location(0.0, 0.0))

    def __post_init__(self):
        route = tuple((int(c[0]), int(c[1])) for c in self.route)
        if len(set(route)) != len(route):
            raise ValidationError("plan targets must be unique")
        object.__setattr__(self, "route", route)
        object.__setattr__(self, "origin", Location(*map(float, self.origin)))

    def __len__(self):
        return len(self.route)

    def length(self, grid: FieldGrid) -> float:
        return path_length(self.origin, self.route, grid)

    def waypoints(self, grid: FieldGrid) -> list:
        return [grid.cell_center(c) for c in self.route]


def _rng(seed):
    return np.random.default_rng(seed)


def _origin(grid, origin):
    return grid.origin if origin is None else Location(*map(float, origin))


def _check_plan_cells(grid, cells):
    for c in cells:
        if not grid.is_reachable(c):
            raise ValidationError(f"cell {c} is not a reachable grid cell")


def path_length(origin, route, grid: FieldGrid) -> float:
    """Euclidean length from ``origin`` through the centers of ``route``."""
    if not route:
        return 0.0
    pts = np.array([tuple(origin)] + [grid.cell_center(c) for c in route])
    return float(np.sum(np.hypot(*np.diff(pts, axis=0).T)))


SMALL_TOUR = 10


def tsp_route(origin, targets, grid: FieldGrid):
    """Short open path from ``origin`` through every target cell.

    Nearest-neighbour construction from the origin, improved with 2-opt
    segment reversals and segment relocations (a run of consecutive targets
    moved elsewhere, optionally reversed) until neither shortens the path.
    The origin stays fixed and the path does not return to it.

    Up to ``SMALL_TOUR`` targets, relocations may move runs of any length and
    the search is repeated with every target forced first, keeping the
    shortest result; larger tours use a single start and runs of up to three.

    Returns ``(route, length)`` with the length including the origin leg.
    """
    cells = [(int(c[0]), int(c[1])) for c in targets]
    if not cells:
        raise ValidationError("tsp_route needs at least one target")
    if len(set(cells)) != len(cells):
        raise ValidationError("tsp_route targets must be unique")
    _check_plan_cells(grid, cells)
    origin = Location(*map(float, origin))
    # row-major order so nearest-neighbour ties do not depend on input order
    cells.sort(key=lambda c: (c[1], c[0]))
    pts = np.array([origin] + [grid.cell_center(c) for c in cells])
    d = np.hypot(pts[:, None, 0] - pts[None, :, 0], pts[:, None, 1] - pts[None, :, 1])

    small = len(cells) <= SMALL_TOUR
    starts = [None] + (list(range(1, len(cells) + 1)) if small else [])
    max_seg = None if small else 3
    best_order, best_len = None, np.inf
    # the plain nearest-neighbour start comes first and wins ties
    for first in starts:
        order = _nearest_neighbour(d, first)
        while True:
            _two_opt(order, d)
            if not _or_opt(order, d, max_seg):
                break
        length = float(d[order[:-1], order[1:]].sum())
        if length < best_len - 1e-9:
            best_order, best_len = order, length
    order = best_order
    route = [cells[k - 1] for k in order[1:]]
    length = float(d[order[:-1], order[1:]].sum())
    return route, length


def _nearest_neighbour(d, first=None):
    """Greedy path over the nodes of ``d`` starting at node 0."""
    n = len(d) - 1
    order = [0]
    left = np.ones(n + 1, dtype=bool)
    left[0] = False
    if first is not None:
        order.append(int(first))
        left[first] = False
    while len(order) <= n:
        nxt = int(np.argmin(np.where(left, d[order[-1]], np.inf)))
        order.append(nxt)
        left[nxt] = False
    return np.array(order)


def _two_opt(order, d, tol=1e-10):
    """In-place 2-opt on an open path whose first node is pinned."""
    n = len(order) - 1
    if n < 2:
        return order
    improved = True
    while improved:
        improved = False
        for i in range(1, n):
            a, b = order[i - 1], order[i]
            js = np.arange(i + 1, n + 1)
            c = order[js]
            has_next = js < n
            e = order[np.minimum(js + 1, n)]
            delta = d[a, c] - d[a, b]
            delta = delta + np.where(has_next, d[b, e] - d[c, e], 0.0)
            k = int(np.argmin(delta))
            if delta[k] < -tol:
                j = int(js[k])
                order[i:j + 1] = order[i:j + 1][::-1].copy()
                improved = True
    return order


def _or_opt(order, d, max_seg=None, tol=1e-10):
    """One pass of segment relocation on a pinned open path; True if improved."""
    n = len(order) - 1
    improved = False
    max_seg = n if max_seg is None else min(max_seg, n)
    for seg_len in range(1, max_seg + 1):
        i = 1
        while i + seg_len - 1 <= n:
            seg = order[i:i + seg_len]
            prev = order[i - 1]
            has_next = i + seg_len <= n
            gain = d[prev, seg[0]]
            if has_next:
                nxt = order[i + seg_len]
                gain += d[seg[-1], nxt] - d[prev, nxt]
            rest = np.concatenate([order[:i], order[i + seg_len:]])
            a = rest
            b = np.append(rest[1:], -1)
            tail = b < 0
            bb = np.where(tail, 0, b)
            best_delta, best = -tol, None
            for first, last, flip in ((seg[0], seg[-1], False), (seg[-1], seg[0], True)):
                add = d[a, first] + np.where(tail, 0.0, d[last, bb] - d[a, bb])
                delta = add - gain
                k = int(np.argmin(delta))
                if delta[k] < best_delta:
                    best_delta, best = delta[k], (k, flip)
            if best is not None:
                k, flip = best
                piece = seg[::-1] if flip else seg
                order[:] = np.concatenate([rest[:k + 1], piece, rest[k + 1:]])
                improved = True
            else:
                i += 1
    return improved


def _nearest_reachable(grid, point, exclude=()):
    """Reachable cell whose center is closest to ``point``; ties row-major."""
    centers = grid.centers()
    flat = grid.reachable_flat()
    d = np.hypot(centers[:, 0] - point[0], centers[:, 1] - point[1])
    if exclude:
        ex = np.isin(flat, [grid.flat(c) for c in exclude])
        d = np.where(ex, np.inf, d)
    k = int(np.argmin(d))
    if not np.isfinite(d[k]):
        raise ExhaustedError("no reachable cell left to snap to")
    return grid.unflat(flat[k])


def plan_random(grid: FieldGrid, n: int, seed=None, origin=None) -> Plan:
    """``n`` distinct reachable cells drawn uniformly, routed from ``origin``."""
    cells = grid.reachable_cells()
    if not 1 <= n <= len(cells):
        raise ValidationError(f"n must be in [1, {len(cells)}], got {n}")
    pick = _rng(seed).choice(len(cells), size=n, replace=False)
    origin = _origin(grid, origin)
    route, _ = tsp_route(origin, [cells[k] for k in pick], grid)
    return Plan(tuple(route), origin)


def w_vertices(grid: FieldGrid, origin=None) -> np.ndarray:
    """The five corners of the W pattern, in travel order.

    Vertex x positions are evenly spaced between the left and right edges
    (inset by half a cell). The two ends and the middle vertex sit on the
    long edge nearest ``origin`` so the robot enters the pattern directly;
    travel starts from whichever end is closer.
    """
    o = _origin(grid, origin)
    half = grid.cell_size / 2
    x0, y0 = grid.origin
    xs = np.linspace(x0 + half, x0 + grid.width - half, 5)
    y_lo, y_hi = y0 + half, y0 + grid.height - half
    near, far = (y_lo, y_hi) if abs(o.y - y_lo) <= abs(o.y - y_hi) else (y_hi, y_lo)
    ys = np.array([near, far, near, far, near])
    verts = np.column_stack([xs, ys])
    if math.hypot(*(verts[-1] - o)) < math.hypot(*(verts[0] - o)):
        verts = verts[::-1]
    return verts


def plan_w_shape(grid: FieldGrid, n: int, origin=None) -> Plan:
    """``n`` waypoints evenly spaced by arc length along a W across the field.

    Waypoints are snapped to the nearest reachable cell and repeated cells are
    dropped, so the plan may hold fewer than ``n`` targets on small grids.
    """
    if n < 5:
        raise ValidationError(f"a W pattern needs n >= 5 waypoints, got {n}")
    verts = w_vertices(grid, origin)
    seg = np.hypot(*np.diff(verts, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    s = np.linspace(0.0, cum[-1], n)
    # vertices land exactly on their arc positions for n = 5
    pts = np.column_stack([np.interp(s, cum, verts[:, 0]), np.interp(s, cum, verts[:, 1])])
    route = []
    for p in pts:
        c = _nearest_reachable(grid, p)
        if c not in route:
            route.append(c)
    return Plan(tuple(route), _origin(grid, origin))


def split_rectangles(rect, n):
    """Cut ``rect = (x, y, w, h)`` into ``n`` equal-area parts.

    Each cut runs across the longer side, dividing the part count as evenly
    as possible and placing the cut in proportion.
    """
    x, y, w, h = rect
    if n == 1:
        return [rect]
    n1 = n // 2
    f = n1 / n
    if w >= h:
        a, b = (x, y, w * f, h), (x + w * f, y, w * (1 - f), h)
    else:
        a, b = (x, y, w, h * f), (x, y + h * f, w, h * (1 - f))
    return split_rectangles(a, n1) + split_rectangles(b, n - n1)


def plan_area_split(grid: FieldGrid, n: int, origin=None) -> Plan:
    """One target at the centroid of each of ``n`` equal-area field parts."""
    if not 1 <= n <= grid.n_reachable:
        raise ValidationError(f"n must be in [1, {grid.n_reachable}], got {n}")
    parts = split_rectangles((grid.origin.x, grid.origin.y, grid.width, grid.height), n)
    chosen = []
    for px, py, pw, ph in parts:
        chosen.append(_nearest_reachable(grid, (px + pw / 2, py + ph / 2), exclude=chosen))
    origin = _origin(grid, origin)
    route, _ = tsp_route(origin, chosen, grid)
    return Plan(tuple(route), origin)


def _candidate_mask(kv_grid, exclude: Iterable = ()):
    kv = np.asarray(kv_grid, dtype=float)
    ok = ~np.isnan(kv)
    for i, j in exclude:
        if 0 <= j < kv.shape[0] and 0 <= i < kv.shape[1]:
            ok[j, i] = False
    return kv, ok


def next_greedy(kv_grid, visited_cells=()) -> tuple:
    """Unvisited reachable cell with the highest KV."""
    kv, ok = _candidate_mask(kv_grid, visited_cells)
    if not ok.any():
        raise ExhaustedError("no unvisited reachable cell left")
    k = int(np.argmax(np.where(ok, kv, -np.inf).ravel()))
    ny, nx = kv.shape
    return (k % nx, k // nx)


def roulette(weights, rng) -> int:
    """Index drawn with probability proportional to ``weights``.

    Falls back to a uniform draw when every weight is zero.
    """
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    if not total > 0:
        return int(rng.integers(len(w)))
    cum = np.cumsum(w)
    k = int(np.searchsorted(cum, rng.random() * total, side="right"))
    return min(k, len(w) - 1)


def next_monte_carlo(kv_grid, visited_cells=(), candidate_count=50, seed=None) -> tuple:
    """KV-weighted random pick among ``candidate_count`` random unvisited cells.

    ``seed`` may be an integer or a ``numpy.random.Generator``.
    """
    rng = _rng(seed)
    kv, ok = _candidate_mask(kv_grid, visited_cells)
    flat = np.flatnonzero(ok.ravel())
    if flat.size == 0:
        raise ExhaustedError("no unvisited reachable cell left")
    m = min(int(candidate_count), flat.size)
    cand = rng.choice(flat, size=m, replace=False)
    k = int(cand[roulette(kv.ravel()[cand], rng)])
    nx = kv.shape[1]
    return (k % nx, k // nx)


def _kv_at(kv, cells):
    return np.array([kv[j, i] for i, j in cells], dtype=float)


def adapt_plan_greedy(plan: Plan, kv_grid, grid: FieldGrid, visited_cells=()) -> Plan:
    """Add the best unplanned cell if it beats every target, prune low-KV targets.

    A target is pruned when its KV falls below mean - 2 * std of the target
    KVs (population std); pruning only applies with three or more targets.
    The surviving targets are re-routed from ``plan.origin``.
    """
    if len(plan) == 0:
        raise ValidationError("cannot adapt an empty plan")
    kv = np.asarray(kv_grid, dtype=float)
    targets = list(plan.route)
    target_kv = _kv_at(kv, targets)
    try:
        best = next_greedy(kv, list(visited_cells) + targets)
    except ExhaustedError:
        best = None
    if best is not None and kv[best[1], best[0]] > target_kv.max():
        targets.append(best)
        target_kv = np.append(target_kv, kv[best[1], best[0]])
    if len(targets) >= 3:
        cut = target_kv.mean() - 2.0 * target_kv.std()
        keep = target_kv >= cut
        targets = [c for c, k in zip(targets, keep) if k]
    route, _ = tsp_route(plan.origin, targets, grid)
    return Plan(tuple(route), plan.origin)


def adapt_plan_mc(plan: Plan, kv_grid, grid: FieldGrid, candidate_count=50, seed=None, visited_cells=()) -> Plan:
    """Swap the lowest-KV target for a KV-weighted random newcomer.

    The route keeps its length and is re-routed from ``plan.origin``.
    """
    if len(plan) == 0:
        raise ValidationError("cannot adapt an empty plan")
    rng = _rng(seed)
    kv = np.asarray(kv_grid, dtype=float)
    targets = list(plan.route)
    try:
        new = next_monte_carlo(kv, list(visited_cells) + targets, candidate_count, rng)
    except ExhaustedError:
        new = None
    if new is not None:
        target_kv = _kv_at(kv, targets)
        low = np.flatnonzero(target_kv == target_kv.min())
        drop = min((targets[k] for k in low), key=lambda c: (c[1], c[0]))
        targets.remove(drop)
        targets.append(new)
    route, _ = tsp_route(plan.origin, targets, grid)
    return Plan(tuple(route), plan.origin)


def initial_plan(config: StrategyConfig, grid: FieldGrid, origin=None, rng=None) -> Optional[Plan]:
    """Up-front plan for area-coverage and adaptive strategies; None for NBV."""
    n = min(config.budget, grid.n_reachable)
    kind = config.kind
    if kind in ADAPTIVE:
        kind = config.initial_plan_kind
    if kind == "random":
        return plan_random(grid, n, rng if rng is not None else config.seed, origin)
    if kind == "w_shape":
        return plan_w_shape(grid, max(n, 5), origin)
    if kind == "area_split":
        return plan_area_split(grid, n, origin)
    return None
