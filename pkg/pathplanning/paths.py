"""
Path and goal-area value types.
"""
import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

from geometry.grid import Cell
from geometry.world import Coordinate

from .exceptions import InvalidPlanningParameter


def segment_length(a: Cell, b: Cell) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


def turn_angle(a: Cell, b: Cell, c: Cell) -> float:
    """Heading change at b between segments a-b and b-c, in degrees"""
    ux, uy = b[0] - a[0], b[1] - a[1]
    vx, vy = c[0] - b[0], c[1] - b[1]
    norm = math.hypot(ux, uy) * math.hypot(vx, vy)
    if norm == 0:
        return 0.0
    cosine = max(-1.0, min(1.0, (ux * vx + uy * vy) / norm))
    return math.degrees(math.acos(cosine))


def path_max_turn(path) -> float:
    cells = path.cells if isinstance(path, Path) else tuple(path)
    if len(cells) < 3:
        return 0.0
    return max(turn_angle(cells[k - 1], cells[k], cells[k + 1]) for k in range(1, len(cells) - 1))


@dataclass(frozen=True)
class Path:
    """
    Any-angle path over cell centers. length is in cell units; multiply
    by the grid resolution for workspace units.
    """
    cells: Tuple[Cell, ...]
    length: float = field(init=False)
    max_turn: float = field(init=False)

    def __post_init__(self):
        cells = tuple((int(i), int(j)) for i, j in self.cells)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(
            self, "length", sum(segment_length(a, b) for a, b in zip(cells, cells[1:]))
        )
        object.__setattr__(self, "max_turn", path_max_turn(cells))

    @classmethod
    def of(cls, cells: Sequence[Cell]) -> "Path":
        return cls(tuple(cells))

    @property
    def end(self) -> Cell:
        return self.cells[-1]

    def waypoints(self, grid) -> Tuple[Coordinate, ...]:
        return tuple(grid.cell_center(cell) for cell in self.cells)

    def as_dict(self) -> dict:
        return {
            "cells": [list(cell) for cell in self.cells],
            "length": round(self.length, 9),
            "max_turn": round(self.max_turn, 9),
        }


@dataclass(frozen=True)
class GoalArea:
    """Fuzzy relocation target: every point within r_g of cp"""
    cp: Coordinate
    r_g: float

    def __post_init__(self):
        if self.r_g < 0:
            raise InvalidPlanningParameter(f"Goal radius must be non-negative, got {self.r_g}")
        object.__setattr__(self, "cp", (float(self.cp[0]), float(self.cp[1])))
        object.__setattr__(self, "r_g", float(self.r_g))

    def contains(self, point: Coordinate, tolerance: float = 1e-9) -> bool:
        return math.hypot(point[0] - self.cp[0], point[1] - self.cp[1]) <= self.r_g + tolerance
