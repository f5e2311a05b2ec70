"""
Square-cell discretization of a workspace.

Cells use center-based notation: cell (i, j) covers
[x_min + i*res, x_min + (i+1)*res] x [y_min + j*res, y_min + (j+1)*res]
and its center is the reference point for paths.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Tuple

import numpy as np
from scipy.ndimage import binary_dilation
from shapely.geometry import box
from shapely.prepared import prep

from .exceptions import EmptyWorkspace, OutOfBounds, ResolutionTooCoarse
from .world import Coordinate, Workspace

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]

MOORE = np.ones((3, 3), dtype=bool)

NEIGHBOR_OFFSETS = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=bool)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Grid:
    """
    Traversability layers over a workspace.

    base_blocked comes from obstacle overlap, outlined_blocked adds the
    Moore ring around it once double_outline has run (before that the two
    layers are equal). owners maps every base-blocked cell to the ids of the
    obstacles overlapping it.
    """
    res: float
    width: int
    height: int
    base_blocked: np.ndarray
    outlined_blocked: np.ndarray
    origin: Coordinate = (0.0, 0.0)
    outlined: bool = False
    owners: Mapping[Cell, Tuple[int, ...]] = field(default_factory=lambda: MappingProxyType({}))

    @classmethod
    def from_blocked(cls, blocked, res: float = 1.0, origin: Coordinate = (0.0, 0.0),
                     outline: bool = False) -> "Grid":
        """Build a grid straight from a (width, height) boolean array"""
        base = _frozen(blocked)
        grid = cls(
            res=float(res),
            width=base.shape[0],
            height=base.shape[1],
            base_blocked=base,
            outlined_blocked=base,
            origin=(float(origin[0]), float(origin[1])),
        )
        return double_outline(grid) if outline else grid

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (
            self.res == other.res
            and self.origin == other.origin
            and self.outlined == other.outlined
            and np.array_equal(self.base_blocked, other.base_blocked)
            and np.array_equal(self.outlined_blocked, other.outlined_blocked)
            and dict(self.owners) == dict(other.owners)
        )

    __hash__ = None

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.width, self.height)

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def check(self, cell: Cell) -> Cell:
        if not self.in_bounds(cell):
            raise OutOfBounds(cell, self.shape)
        return (int(cell[0]), int(cell[1]))

    def traversable(self, cell: Cell) -> bool:
        return not self.outlined_blocked[cell[0], cell[1]]

    def cells(self) -> Iterator[Cell]:
        for i in range(self.width):
            for j in range(self.height):
                yield (i, j)

    def free_cells(self) -> Iterator[Cell]:
        for i, j in zip(*np.nonzero(~self.outlined_blocked)):
            yield (int(i), int(j))

    def neighbors(self, cell: Cell) -> Iterator[Cell]:
        """8-connected in-bounds neighbors, traversable or not"""
        i, j = cell
        for di, dj in NEIGHBOR_OFFSETS:
            ni, nj = i + di, j + dj
            if 0 <= ni < self.width and 0 <= nj < self.height:
                yield (ni, nj)

    def cell_center(self, cell: Cell) -> Coordinate:
        return (
            self.origin[0] + (cell[0] + 0.5) * self.res,
            self.origin[1] + (cell[1] + 0.5) * self.res,
        )

    def cell_box(self, cell: Cell):
        x0 = self.origin[0] + cell[0] * self.res
        y0 = self.origin[1] + cell[1] * self.res
        return box(x0, y0, x0 + self.res, y0 + self.res)

    def cell_of(self, point: Coordinate) -> Cell:
        """Cell containing a point, clipped to the grid"""
        i = math.floor((point[0] - self.origin[0]) / self.res)
        j = math.floor((point[1] - self.origin[1]) / self.res)
        return (min(max(i, 0), self.width - 1), min(max(j, 0), self.height - 1))

    def obstacle_cells(self, obstacle_id: int) -> Iterable[Cell]:
        return [cell for cell, ids in self.owners.items() if obstacle_id in ids]


def _cell_count(span: float, res: float) -> int:
    return max(1, math.ceil(round(span / res, 9)))


def discretize(workspace: Workspace, res: float) -> Grid:
    """Mark every cell whose closed square meets a non-destroyed obstacle"""
    x_min, x_max, y_min, y_max = workspace.bounds
    if not (x_min < x_max and y_min < y_max):
        raise EmptyWorkspace(f"Degenerate workspace bounds {workspace.bounds}")
    radius = workspace.agent_radius
    if res <= 0 or (radius is not None and res < 2 * radius):
        raise ResolutionTooCoarse(f"Cell size {res} cannot hold agents of radius {radius}")

    width = _cell_count(x_max - x_min, res)
    height = _cell_count(y_max - y_min, res)
    base = np.zeros((width, height), dtype=bool)
    owners = {}

    for obstacle in workspace.active_obstacles():
        minx, miny, maxx, maxy = obstacle.polygon.bounds
        # One extra cell below: a polygon edge on a cell border touches both cells.
        i_lo = max(0, math.floor((minx - x_min) / res) - 1)
        i_hi = min(width - 1, math.floor((maxx - x_min) / res))
        j_lo = max(0, math.floor((miny - y_min) / res) - 1)
        j_hi = min(height - 1, math.floor((maxy - y_min) / res))
        shape = prep(obstacle.polygon)
        for i in range(i_lo, i_hi + 1):
            x0 = x_min + i * res
            for j in range(j_lo, j_hi + 1):
                y0 = y_min + j * res
                if shape.intersects(box(x0, y0, x0 + res, y0 + res)):
                    base[i, j] = True
                    owners.setdefault((i, j), []).append(obstacle.id)

    logger.debug("Discretized %sx%s grid, %s blocked cells", width, height, int(base.sum()))
    frozen = _frozen(base)
    return Grid(
        res=float(res),
        width=width,
        height=height,
        base_blocked=frozen,
        outlined_blocked=frozen,
        origin=(x_min, y_min),
        owners=MappingProxyType({cell: tuple(ids) for cell, ids in owners.items()}),
    )


def double_outline(grid: Grid) -> Grid:
    """Block the 8 neighbors of every base-blocked cell"""
    if not grid.base_blocked.any():
        return replace(grid, outlined_blocked=grid.base_blocked, outlined=True)
    ring = binary_dilation(grid.base_blocked, structure=MOORE)
    return replace(grid, outlined_blocked=_frozen(ring | grid.base_blocked), outlined=True)


def rebuild_without(grid: Grid, obstacle_ids: Iterable[int]) -> Grid:
    """
    Grid equal to re-discretizing with the given obstacles removed.

    Only cells in the footprint of the removed obstacles are touched: a
    cell stays blocked while any other obstacle still overlaps it.
    """
    removed = set(obstacle_ids)
    if not removed:
        return grid
    base = np.array(grid.base_blocked)
    owners = dict(grid.owners)
    for cell, ids in grid.owners.items():
        if removed.intersection(ids):
            remaining = tuple(i for i in ids if i not in removed)
            if remaining:
                owners[cell] = remaining
            else:
                del owners[cell]
                base[cell] = False
    frozen = _frozen(base)
    rebuilt = replace(
        grid,
        base_blocked=frozen,
        outlined_blocked=frozen,
        outlined=False,
        owners=MappingProxyType(owners),
    )
    return double_outline(rebuilt) if grid.outlined else rebuilt


def approach_cells(grid: Grid, obstacle_id: int, reach: int = 2) -> frozenset:
    """Traversable cells within Chebyshev distance `reach` of an obstacle's footprint"""
    footprint = np.zeros(grid.shape, dtype=bool)
    for cell in grid.obstacle_cells(obstacle_id):
        footprint[cell] = True
    if not footprint.any():
        return frozenset()
    size = 2 * reach + 1
    near = binary_dilation(footprint, structure=np.ones((size, size), dtype=bool))
    near &= ~grid.outlined_blocked
    return frozenset((int(i), int(j)) for i, j in zip(*np.nonzero(near)))
