"""Occupancy grids: representation, projection, inflation, interpolation, generators, file I/O.

World convention used throughout the package: ``origin`` is the minimum corner
of cell ``(0, 0[, 0])``, cell ``(i, j)`` has its center at
``origin + (i + 0.5, j + 0.5) * resolution`` and flat value arrays are stored
x-fastest, i.e. ``index = i + nx * (j + ny * k)``.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage

from scoutpath.errors import MalformedFile, OutOfBounds, PlacementFailed

# relative slack on the inflation disk test, absorbs rounding in radius/resolution
_DISK_RTOL = 1e-9


class PlanarPoint(NamedTuple):
    x: float
    y: float


class GridIndex(NamedTuple):
    i: int
    j: int
    k: int = 0


def _check_values(values: NDArray[np.float64], ndim: int) -> None:
    if values.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d value array, got shape {values.shape}")
    if values.size == 0 or min(values.shape) < 1:
        raise ValueError("grid must have at least one cell per axis")
    if not np.all(np.isfinite(values)) or values.min() < 0.0 or values.max() > 1.0:
        raise ValueError("occupancy values must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class OccupancyGrid2D:
    """Probabilistic obstacle field on a regular planar lattice.

    ``values[i, j]`` is the occupancy of the cell ``i`` steps along x and ``j``
    along y. The array is made read-only on construction.
    """

    values: NDArray[np.float64]
    resolution: float = 1.0
    origin: tuple[float, float] = (0.0, 0.0)
    _nodes: list = field(init=False, repr=False)
    _box: tuple = field(init=False, repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        _check_values(values, 2)
        if not (self.resolution > 0 and math.isfinite(self.resolution)):
            raise ValueError("resolution must be positive")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "resolution", float(self.resolution))
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        # plain nested lists are much faster than numpy for scalar lookups in the planner loop
        object.__setattr__(self, "_nodes", values.tolist())
        nx, ny = values.shape
        x0, y0 = self.origin
        object.__setattr__(self, "_box", (x0, x0 + nx * self.resolution, y0, y0 + ny * self.resolution))

    @property
    def size(self) -> tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """World extent as ``(x_min, x_max, y_min, y_max)``."""
        return self._box

    def flat(self) -> NDArray[np.float64]:
        return self.values.ravel(order="F")

    @classmethod
    def from_flat(cls, size, values, resolution=1.0, origin=(0.0, 0.0)) -> OccupancyGrid2D:
        arr = np.asarray(values, dtype=np.float64).reshape(tuple(size), order="F")
        return cls(arr, resolution, tuple(origin))

    def cell_center(self, i: int, j: int) -> PlanarPoint:
        x0, y0 = self.origin
        return PlanarPoint(x0 + (i + 0.5) * self.resolution, y0 + (j + 0.5) * self.resolution)

    def cell_of(self, p) -> GridIndex:
        """Index of the cell containing ``p``; points on the far edges map to the last cell."""
        self._require_inside(p)
        nx, ny = self.size
        i = min(int(math.floor((p[0] - self.origin[0]) / self.resolution)), nx - 1)
        j = min(int(math.floor((p[1] - self.origin[1]) / self.resolution)), ny - 1)
        return GridIndex(max(i, 0), max(j, 0))

    def contains(self, p) -> bool:
        x_min, x_max, y_min, y_max = self._box
        return x_min <= p[0] <= x_max and y_min <= p[1] <= y_max

    def _require_inside(self, p) -> None:
        if not self.contains(p):
            raise OutOfBounds(f"point ({p[0]!r}, {p[1]!r}) outside grid extent {self.bounds}")

    def occupancy_at(self, p) -> float:
        """Bilinear interpolation of the cell-center values around ``p``.

        Between the grid edge and the outermost cell centers the coordinate is
        clamped to the center lattice, so there is no extrapolation.
        """
        x, y = p[0], p[1]
        x_min, x_max, y_min, y_max = self._box
        if not (x_min <= x <= x_max and y_min <= y <= y_max):
            raise OutOfBounds(f"point ({x!r}, {y!r}) outside grid extent {self.bounds}")
        nx, ny = self.values.shape
        u = (x - x_min) / self.resolution - 0.5
        v = (y - y_min) / self.resolution - 0.5
        u = 0.0 if u < 0.0 else (nx - 1.0 if u > nx - 1 else u)
        v = 0.0 if v < 0.0 else (ny - 1.0 if v > ny - 1 else v)
        i = int(u)
        j = int(v)
        if i > nx - 2:
            i = nx - 2 if nx > 1 else 0
        if j > ny - 2:
            j = ny - 2 if ny > 1 else 0
        fx, fy = u - i, v - j
        nodes = self._nodes
        c0, c1 = nodes[i], nodes[i + 1] if nx > 1 else nodes[i]
        j1 = j + 1 if ny > 1 else j
        return (c0[j] * (1.0 - fx) + c1[j] * fx) * (1.0 - fy) + (c0[j1] * (1.0 - fx) + c1[j1] * fx) * fy

    def occupancy_gradient(self, p) -> tuple[float, float]:
        """Gradient (per meter) of the bilinear patch containing ``p``.

        Along an axis where ``p`` sits in the clamped border band the field is
        constant, so that component is zero. On a patch seam the patch on the
        positive side is used.
        """
        x, y = p[0], p[1]
        x_min, x_max, y_min, y_max = self._box
        if not (x_min <= x <= x_max and y_min <= y <= y_max):
            raise OutOfBounds(f"point ({x!r}, {y!r}) outside grid extent {self.bounds}")
        nx, ny = self.values.shape
        res = self.resolution
        u = (x - x_min) / res - 0.5
        v = (y - y_min) / res - 0.5
        clamp_u = u <= 0.0 or u >= nx - 1
        clamp_v = v <= 0.0 or v >= ny - 1
        u = 0.0 if u < 0.0 else (nx - 1.0 if u > nx - 1 else u)
        v = 0.0 if v < 0.0 else (ny - 1.0 if v > ny - 1 else v)
        i = int(u)
        j = int(v)
        if i > nx - 2:
            i = nx - 2 if nx > 1 else 0
        if j > ny - 2:
            j = ny - 2 if ny > 1 else 0
        fx, fy = u - i, v - j
        nodes = self._nodes
        c0, c1 = nodes[i], nodes[i + 1] if nx > 1 else nodes[i]
        j1 = j + 1 if ny > 1 else j
        v00, v10, v01, v11 = c0[j], c1[j], c0[j1], c1[j1]
        gx = 0.0 if clamp_u else ((v10 - v00) * (1.0 - fy) + (v11 - v01) * fy) / res
        gy = 0.0 if clamp_v else ((v01 - v00) * (1.0 - fx) + (v11 - v10) * fx) / res
        return gx, gy


@dataclass(frozen=True, eq=False)
class OccupancyGrid3D:
    """Probabilistic obstacle field on a regular volumetric lattice, ``values[i, j, k]``."""

    values: NDArray[np.float64]
    resolution: float = 1.0
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        _check_values(values, 3)
        if not (self.resolution > 0 and math.isfinite(self.resolution)):
            raise ValueError("resolution must be positive")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "resolution", float(self.resolution))
        object.__setattr__(self, "origin", tuple(float(c) for c in self.origin))

    @property
    def size(self) -> tuple[int, int, int]:
        return self.values.shape  # type: ignore[return-value]

    @property
    def bounds(self) -> tuple[float, float, float, float, float, float]:
        nx, ny, nz = self.size
        x0, y0, z0 = self.origin
        r = self.resolution
        return (x0, x0 + nx * r, y0, y0 + ny * r, z0, z0 + nz * r)

    def flat(self) -> NDArray[np.float64]:
        return self.values.ravel(order="F")

    @classmethod
    def from_flat(cls, size, values, resolution=1.0, origin=(0.0, 0.0, 0.0)) -> OccupancyGrid3D:
        arr = np.asarray(values, dtype=np.float64).reshape(tuple(size), order="F")
        return cls(arr, resolution, tuple(origin))


def project_to_plane(grid3: OccupancyGrid3D) -> OccupancyGrid2D:
    """Collapse a 3D grid onto the XY plane by taking each column's maximum."""
    return OccupancyGrid2D(grid3.values.max(axis=2), grid3.resolution, grid3.origin[:2])


def disk_offsets(radius_cells: float) -> list[tuple[int, int]]:
    """Integer offsets whose center distance is within ``radius_cells``."""
    r = int(math.floor(radius_cells * (1 + _DISK_RTOL)))
    lim = radius_cells * radius_cells * (1 + 2 * _DISK_RTOL)
    return [(di, dj) for di in range(-r, r + 1) for dj in range(-r, r + 1) if di * di + dj * dj <= lim]


def inflate(grid2: OccupancyGrid2D, radius: float, threshold: float = 0.5) -> OccupancyGrid2D:
    """Raise to 1.0 every cell within ``radius`` meters of a cell valued ``>= threshold``.

    Distances are measured between cell centers. Cells outside every disk keep
    their original (sub-threshold) probability.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie strictly between 0 and 1")
    source = grid2.values >= threshold
    offsets = disk_offsets(radius / grid2.resolution)
    r = max(max(abs(di), abs(dj)) for di, dj in offsets)
    footprint = np.zeros((2 * r + 1, 2 * r + 1), dtype=bool)
    for di, dj in offsets:
        footprint[di + r, dj + r] = True
    dilated = ndimage.binary_dilation(source, structure=footprint, border_value=0)
    out = np.where(dilated, 1.0, grid2.values)
    return OccupancyGrid2D(out, grid2.resolution, grid2.origin)


def gen_random(size: tuple[int, int], density: float, seed: int,
               resolution: float = 1.0) -> OccupancyGrid2D:
    """Binary grid whose cells are occupied independently with probability ``density``."""
    if not 0.0 <= density <= 1.0:
        raise ValueError("density must lie in [0, 1]")
    nx, ny = size
    if nx < 1 or ny < 1:
        raise ValueError("size must be positive")
    rng = np.random.default_rng(seed)
    draws = rng.random((ny, nx)).T  # drawn in file order (x-fastest)
    return OccupancyGrid2D(np.where(draws < density, 1.0, 0.0), resolution)


@dataclass(frozen=True)
class Prism:
    """Axis-aligned block occupying cells ``[i0, i1) x [j0, j1) x [0, height)``."""

    i0: int
    j0: int
    i1: int
    j1: int
    height: int

    @property
    def footprint_area(self) -> int:
        return (self.i1 - self.i0) * (self.j1 - self.j0)


def city_block_prisms(size: tuple[int, int, int], block_count: int, seed: int,
                      street: int | None = None, max_attempts: int = 200) -> list[Prism]:
    """Seeded placement of ``block_count`` non-touching prisms.

    Every pair of prisms is separated by at least ``street`` free cells and
    every prism keeps one free cell to the grid border, so the free part of the
    footprint stays 4-connected.
    """
    nx, ny, nz = size
    if block_count < 1:
        raise ValueError("block_count must be at least 1")
    if min(size) < 1:
        raise ValueError("size must be positive")
    short = min(nx, ny)
    if street is None:
        street = max(1, short // 16)
    min_side = max(1, short // 12)
    max_side = max(min_side, short // 5)
    # capacity bound: each block plus its half-street margin claims at least this much area
    claim = (min_side + street) ** 2
    if nx < min_side + 2 or ny < min_side + 2 or block_count * claim > (nx - 2 + street) * (ny - 2 + street):
        raise PlacementFailed(f"{block_count} blocks with {street}-cell streets do not fit in {nx}x{ny}")

    rng = np.random.default_rng(seed)
    taken = np.zeros((nx, ny), dtype=bool)  # footprints grown by the street width
    prisms: list[Prism] = []
    zmin = max(1, nz // 5)
    for _ in range(block_count):
        for _attempt in range(max_attempts):
            w = int(rng.integers(min_side, max_side + 1))
            d = int(rng.integers(min_side, max_side + 1))
            if w > nx - 2 or d > ny - 2:
                continue
            i0 = int(rng.integers(1, nx - 1 - w + 1))
            j0 = int(rng.integers(1, ny - 1 - d + 1))
            if taken[i0:i0 + w, j0:j0 + d].any():
                continue
            height = int(rng.integers(zmin, nz + 1))
            prisms.append(Prism(i0, j0, i0 + w, j0 + d, height))
            taken[max(i0 - street, 0):i0 + w + street, max(j0 - street, 0):j0 + d + street] = True
            break
        else:
            raise PlacementFailed(
                f"could not place block {len(prisms) + 1} of {block_count} while keeping corridors")
    return prisms


def gen_city_block(size: tuple[int, int, int], block_count: int, seed: int,
                   resolution: float = 1.0, street: int | None = None) -> OccupancyGrid3D:
    """Synthetic city: rectangular buildings of varied footprint and height on free ground."""
    values = np.zeros(tuple(size), dtype=np.float64)
    for b in city_block_prisms(size, block_count, seed, street=street):
        values[b.i0:b.i1, b.j0:b.j1, :b.height] = 1.0
    return OccupancyGrid3D(values, resolution)


def free_component_count(free: NDArray[np.bool_]) -> int:
    """Number of 4-connected components among ``True`` cells."""
    _, count = ndimage.label(free)
    return int(count)


def bfs_reachable(free: NDArray[np.bool_], start: tuple[int, int]) -> NDArray[np.bool_]:
    """Cells 4-connected to ``start`` through ``free`` cells."""
    nx, ny = free.shape
    seen = np.zeros_like(free, dtype=bool)
    if not free[start]:
        return seen
    seen[start] = True
    queue = deque([start])
    while queue:
        i, j = queue.popleft()
        for a, b in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
            if 0 <= a < nx and 0 <= b < ny and free[a, b] and not seen[a, b]:
                seen[a, b] = True
                queue.append((a, b))
    return seen


# --- file I/O -------------------------------------------------------------------------------

def grid_to_dict(grid: OccupancyGrid2D | OccupancyGrid3D) -> dict:
    kind = "grid2" if isinstance(grid, OccupancyGrid2D) else "grid3"
    return {
        "kind": kind,
        "size": [int(n) for n in grid.size],
        "resolution": grid.resolution,
        "origin": list(grid.origin),
        "order": "x-fastest",
        "values": grid.flat().tolist(),
    }


def save_grid(grid: OccupancyGrid2D | OccupancyGrid3D, path) -> None:
    # json emits repr() floats, which round-trip exactly
    Path(path).write_text(json.dumps(grid_to_dict(grid)) + "\n", encoding="utf-8")


def grid_from_dict(doc) -> OccupancyGrid2D | OccupancyGrid3D:
    if not isinstance(doc, dict):
        raise MalformedFile("grid document must be a JSON object")
    for key in ("kind", "size", "resolution", "origin", "values"):
        if key not in doc:
            raise MalformedFile(f"missing field {key!r}")
    kind = doc["kind"]
    if kind not in ("grid2", "grid3"):
        raise MalformedFile(f"unknown kind {kind!r}")
    dims = 2 if kind == "grid2" else 3
    if doc.get("order", "x-fastest") != "x-fastest":
        raise MalformedFile(f"unsupported value order {doc['order']!r}")
    size, origin, values = doc["size"], doc["origin"], doc["values"]
    if (not isinstance(size, list) or len(size) != dims
            or not all(isinstance(n, int) and not isinstance(n, bool) and n > 0 for n in size)):
        raise MalformedFile(f"size must be {dims} positive integers")
    if (not isinstance(origin, list) or len(origin) != dims
            or not all(_is_number(c) for c in origin)):
        raise MalformedFile(f"origin must be {dims} numbers")
    res = doc["resolution"]
    if not _is_number(res) or not res > 0:
        raise MalformedFile("resolution must be a positive number")
    if not isinstance(values, list) or not all(_is_number(v) for v in values):
        raise MalformedFile("values must be a list of numbers")
    if len(values) != math.prod(size):
        raise MalformedFile(f"values length {len(values)} does not match size product {math.prod(size)}")
    arr = np.asarray(values, dtype=np.float64)
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0 or not np.all(np.isfinite(arr))):
        raise MalformedFile("values must lie in [0, 1]")
    cls = OccupancyGrid2D if dims == 2 else OccupancyGrid3D
    return cls.from_flat(size, arr, res, origin)


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def load_grid(path) -> OccupancyGrid2D | OccupancyGrid3D:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"{path}: not valid JSON ({exc.msg})") from exc
    return grid_from_dict(doc)
