"""
Line rasterization and line-of-sight over a grid.
"""
from typing import List

from .grid import Cell, Grid


def bresenham_cells(c1: Cell, c2: Cell) -> List[Cell]:
    """
    Cells of the Bresenham line from c1 to c2, both ends included.

    The line is always traced from the lexicographically smaller endpoint so
    that los(a, b) == los(b, a). Ties on the minor axis round down.
    """
    c1, c2 = (int(c1[0]), int(c1[1])), (int(c2[0]), int(c2[1]))
    start, end = (c1, c2) if c1 <= c2 else (c2, c1)
    (x0, y0), (x1, y1) = start, end
    dx, dy = abs(x1 - x0), abs(y1 - y0)
    sx = 1 if x1 >= x0 else -1
    sy = 1 if y1 >= y0 else -1

    if dx >= dy:
        major, minor, s_major, s_minor = dx, dy, sx, sy
    else:
        major, minor, s_major, s_minor = dy, dx, sy, sx

    cells = []
    for k in range(major + 1):
        # ceil((2*k*minor - major) / (2*major)) in exact integers
        offset = -((major - 2 * k * minor) // (2 * major)) if major else 0
        if dx >= dy:
            cells.append((x0 + s_major * k, y0 + s_minor * offset))
        else:
            cells.append((x0 + s_minor * offset, y0 + s_major * k))

    if start != c1:
        cells.reverse()
    return cells


def los(grid: Grid, c1: Cell, c2: Cell) -> bool:
    """True iff every cell on the Bresenham line between c1 and c2 is traversable"""
    c1, c2 = grid.check(c1), grid.check(c2)
    blocked = grid.outlined_blocked
    return not any(blocked[i, j] for i, j in bresenham_cells(c1, c2))
