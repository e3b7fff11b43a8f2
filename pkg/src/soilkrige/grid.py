"""Field geometry, cell grid, samples and depth-layer aggregation.

Grids of per-cell values are stored as ``(ny, nx)`` arrays so that row ``j``
holds the cells with y-index ``j``; a cell is addressed by the pair
``(i, j)`` with ``i`` the x-index. Unreachable cells hold NaN in value grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import OutOfBoundsError, ValidationError

Cell = tuple  # (i, j)


class Location(NamedTuple):
    """Field-local planar coordinates in meters."""

    x: float
    y: float

    def distance(self, other) -> float:
        return math.hypot(self.x - other[0], self.y - other[1])


@dataclass(frozen=True, eq=False)
class FieldGrid:
    """Rectangular cell grid with a reachability mask of shape ``(ny, nx)``."""

    origin: Location
    cell_size: float
    nx: int
    ny: int
    reachable: np.ndarray

    def __post_init__(self):
        if not (self.cell_size > 0 and math.isfinite(self.cell_size)):
            raise ValidationError(f"cell_size must be > 0, got {self.cell_size}")
        if self.nx < 1 or self.ny < 1:
            raise ValidationError(f"grid needs nx, ny >= 1, got {self.nx}x{self.ny}")
        mask = np.array(self.reachable, dtype=bool)
        if mask.shape != (self.ny, self.nx):
            raise ValidationError(
                f"mask shape {mask.shape} does not match grid (ny, nx) = {(self.ny, self.nx)}"
            )
        if not mask.any():
            raise ValidationError("grid has no reachable cell")
        mask.setflags(write=False)
        object.__setattr__(self, "origin", Location(*map(float, self.origin)))
        object.__setattr__(self, "reachable", mask)

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def width(self) -> float:
        return self.nx * self.cell_size

    @property
    def height(self) -> float:
        return self.ny * self.cell_size

    @property
    def n_reachable(self) -> int:
        return int(self.reachable.sum())

    def is_reachable(self, cell) -> bool:
        i, j = cell
        return 0 <= i < self.nx and 0 <= j < self.ny and bool(self.reachable[j, i])

    def cell_center(self, cell) -> Location:
        i, j = cell
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise OutOfBoundsError(f"cell {cell} outside {self.nx}x{self.ny} grid")
        return Location(
            self.origin.x + (i + 0.5) * self.cell_size,
            self.origin.y + (j + 0.5) * self.cell_size,
        )

    def cell_of(self, loc) -> tuple:
        return cell_of(self, loc)

    def reachable_cells(self) -> list:
        """Reachable cells in row-major ``(j, i)`` order."""
        jj, ii = np.nonzero(self.reachable)
        return [(int(i), int(j)) for j, i in zip(jj, ii)]

    def reachable_flat(self) -> np.ndarray:
        """Flat indices ``j * nx + i`` of reachable cells, ascending."""
        return np.flatnonzero(self.reachable.ravel())

    def centers(self) -> np.ndarray:
        """``(n_reachable, 2)`` array of reachable cell centers, row-major."""
        jj, ii = np.nonzero(self.reachable)
        return np.column_stack(
            [
                self.origin.x + (ii + 0.5) * self.cell_size,
                self.origin.y + (jj + 0.5) * self.cell_size,
            ]
        )

    def flat(self, cell) -> int:
        return cell[1] * self.nx + cell[0]

    def unflat(self, k) -> tuple:
        return (int(k % self.nx), int(k // self.nx))

    def to_grid(self, values) -> np.ndarray:
        """Scatter per-reachable-cell values into a NaN-padded ``(ny, nx)`` grid."""
        out = np.full(self.shape, np.nan)
        out[self.reachable] = values
        return out


def build_grid(width, height, cell_size, mask=None, origin=(0.0, 0.0)) -> FieldGrid:
    """Discretize a ``width`` x ``height`` field into square cells.

    Cell counts are rounded up so the grid covers the whole field; partial
    edge cells are ordinary cells. ``mask`` is a boolean array of shape
    ``(ny, nx)`` (True = reachable); it defaults to all-reachable.
    """
    for name, v in (("width", width), ("height", height), ("cell_size", cell_size)):
        if not (v > 0 and math.isfinite(v)):
            raise ValidationError(f"{name} must be a positive finite number, got {v}")
    nx = math.ceil(width / cell_size - 1e-12)
    ny = math.ceil(height / cell_size - 1e-12)
    if mask is None:
        mask = np.ones((ny, nx), dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (ny, nx):
            raise ValidationError(
                f"mask shape {mask.shape} does not match grid (ny, nx) = {(ny, nx)}"
            )
    return FieldGrid(Location(*origin), float(cell_size), nx, ny, mask)


def cell_of(grid: FieldGrid, loc) -> tuple:
    """Index ``(i, j)`` of the cell containing ``loc``.

    Points on an interior cell boundary belong to the higher-index cell
    (floor rule); points on the far edge of the grid belong to the last cell.
    """
    x, y = float(loc[0]), float(loc[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise OutOfBoundsError(f"non-finite location {loc}")
    dx = x - grid.origin.x
    dy = y - grid.origin.y
    if dx < 0 or dy < 0 or dx > grid.width or dy > grid.height:
        raise OutOfBoundsError(
            f"location ({x}, {y}) outside grid extent "
            f"[{grid.origin.x}, {grid.origin.x + grid.width}] x "
            f"[{grid.origin.y}, {grid.origin.y + grid.height}]"
        )
    i = min(int(math.floor(dx / grid.cell_size)), grid.nx - 1)
    j = min(int(math.floor(dy / grid.cell_size)), grid.ny - 1)
    return (i, j)


def corner_mask(nx, ny, block=(2, 2)) -> np.ndarray:
    """All-reachable mask with a ``block`` of cells removed at the far corner."""
    mask = np.ones((ny, nx), dtype=bool)
    bx, by = block
    mask[ny - by:, nx - bx:] = False
    return mask


@dataclass(frozen=True)
class LayerSpec:
    """``count`` contiguous depth layers of ``thickness`` cm from the surface."""

    count: int = 8
    thickness: float = 5.0

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 1:
            raise ValidationError(f"layer count must be an integer >= 1, got {self.count}")
        if not (self.thickness > 0 and math.isfinite(self.thickness)):
            raise ValidationError(f"layer thickness must be > 0, got {self.thickness}")

    @property
    def depth(self) -> float:
        return self.count * self.thickness

    def bounds(self, k):
        return (k * self.thickness, (k + 1) * self.thickness)


@dataclass(frozen=True, eq=False)
class DepthProfile:
    """Penetrometer readings (kPa) at uniform ``depth_step`` cm increments.

    Reading ``r`` is taken at depth ``r * depth_step``.
    """

    readings: np.ndarray
    depth_step: float

    def __post_init__(self):
        r = np.array(self.readings, dtype=float).ravel()
        if r.size == 0:
            raise ValidationError("depth profile has no readings")
        if not np.all(np.isfinite(r)) or np.any(r < 0):
            raise ValidationError("depth profile readings must be finite and >= 0")
        if not (self.depth_step > 0 and math.isfinite(self.depth_step)):
            raise ValidationError(f"depth_step must be > 0, got {self.depth_step}")
        r.setflags(write=False)
        object.__setattr__(self, "readings", r)

    @property
    def max_depth(self) -> float:
        return len(self.readings) * self.depth_step

    def depths(self) -> np.ndarray:
        return np.arange(len(self.readings)) * self.depth_step


@dataclass(frozen=True, eq=False)
class Sample:
    """A geo-tagged observation with one aggregated value per depth layer."""

    id: int
    location: Location
    layer_values: np.ndarray
    profile: Optional[DepthProfile] = field(default=None)

    def __post_init__(self):
        v = np.array(self.layer_values, dtype=float).ravel()
        if v.size == 0 or not np.all(np.isfinite(v)):
            raise ValidationError(f"sample {self.id}: layer values must be finite and non-empty")
        v.setflags(write=False)
        object.__setattr__(self, "layer_values", v)
        object.__setattr__(self, "location", Location(*map(float, self.location)))


def aggregate_layers(profile: DepthProfile, spec: LayerSpec) -> np.ndarray:
    """Mean reading inside each layer interval ``[k*t, (k+1)*t)``.

    A reading lying exactly on an interior boundary goes to the deeper layer.
    Readings below the deepest layer are ignored.
    """
    if spec.depth > profile.max_depth * (1 + 1e-9):
        raise ValidationError(
            f"layers reach {spec.depth} cm but the profile only covers {profile.max_depth} cm"
        )
    # relative slack absorbs round-off in r * depth_step on exact boundaries
    idx = np.floor(profile.depths() / spec.thickness + 1e-9).astype(int)
    out = np.empty(spec.count)
    for k in range(spec.count):
        sel = profile.readings[idx == k]
        if sel.size == 0:
            raise ValidationError(
                f"layer {k} ({spec.bounds(k)} cm) contains no reading; "
                f"depth_step {profile.depth_step} cm is too coarse"
            )
        out[k] = sel.mean()
    return out


def make_sample(id, location, profile: DepthProfile, spec: LayerSpec) -> Sample:
    return Sample(id, Location(*location), aggregate_layers(profile, spec), profile)


def pairwise_distances(a: np.ndarray, b: Optional[np.ndarray] = None) -> np.ndarray:
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = a if b is None else np.asarray(b, dtype=float).reshape(-1, 2)
    return np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])


def locations_array(locs: Sequence) -> np.ndarray:
    return np.asarray([(float(p[0]), float(p[1])) for p in locs], dtype=float).reshape(-1, 2)
