import math
import random
from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase
from shapely.geometry import LineString, box

from .exceptions import (
    AlreadyDestroyed, EmptyWorkspace, InvalidPolygon, OutOfBounds, ResolutionTooCoarse,
    UnknownObstacle
)
from .grid import Grid, approach_cells, discretize, double_outline, rebuild_without
from .raster import bresenham_cells, los
from .world import AgentBody, Obstacle, Workspace, destroy_obstacle, segment_clear


def rect(obstacle_id, x0, y0, x1, y1, obstacle_type="block"):
    return Obstacle(obstacle_id, [(x0, y0), (x1, y0), (x1, y1), (x0, y1)], obstacle_type)


def random_workspace(rng, size=12, count=4):
    obstacles = []
    for n in range(count):
        x0 = rng.uniform(0, size - 2)
        y0 = rng.uniform(0, size - 2)
        if rng.random() < 0.5:
            obstacles.append(rect(
                n + 1, x0, y0,
                min(size, x0 + rng.uniform(0.2, 3)), min(size, y0 + rng.uniform(0.2, 3)),
            ))
        else:
            obstacles.append(Obstacle(n + 1, [
                (x0, y0), (min(size, x0 + rng.uniform(0.5, 3)), y0),
                (x0 + rng.uniform(0, 1), min(size, y0 + rng.uniform(0.5, 3))),
            ], "block"))
    return Workspace((0, size, 0, size), obstacles, [], {"block": frozenset()})


def midpoint_oracle(c1, c2):
    """Reference rasterizer using exact rational arithmetic"""
    a, b = sorted([tuple(c1), tuple(c2)])
    dx, dy = b[0] - a[0], b[1] - a[1]
    swap = abs(dy) > abs(dx)
    if swap:
        dx, dy = dy, dx
    steps = abs(dx)
    out = []
    for k in range(steps + 1):
        major = k * (1 if dx >= 0 else -1)
        if steps == 0:
            minor = 0
        else:
            exact = Fraction(k * abs(dy), steps)
            minor = math.ceil(exact - Fraction(1, 2)) * (1 if dy >= 0 else -1)
        out.append((a[0] + minor, a[1] + major) if swap else (a[0] + major, a[1] + minor))
    return out if a == tuple(c1) else list(reversed(out))


class WorkspaceTests(SimpleTestCase):

    def test_degenerate_bounds(self):
        with self.assertRaises(EmptyWorkspace):
            Workspace((0, 0, 0, 5))

    def test_self_intersecting_polygon_rejected(self):
        with self.assertRaises(InvalidPolygon):
            Obstacle(1, [(0, 0), (2, 2), (2, 0), (0, 2)], "block")

    def test_segment_clear_empty(self):
        ws = Workspace((0, 10, 0, 10))
        self.assertTrue(segment_clear(ws, (0.5, 0.5), (9.5, 9.5)))

    def test_segment_endpoint_inside_obstacle(self):
        ws = Workspace((0, 10, 0, 10), [rect(1, 4, 4, 6, 6)])
        self.assertFalse(segment_clear(ws, (1, 1), (5, 5)))

    def test_segment_tangent_to_vertex(self):
        ws = Workspace((0, 10, 0, 10), [Obstacle(1, [(4, 4), (6, 4), (5, 6)], "block")])
        # Passes exactly through vertex (5, 6)
        self.assertFalse(segment_clear(ws, (3, 6), (7, 6)))
        self.assertTrue(segment_clear(ws, (3, 6.01), (7, 6.01)))

    def test_destroy_obstacle(self):
        ws = Workspace((0, 10, 0, 10), [rect(1, 2, 2, 4, 4)])
        destroy_obstacle(ws, 1)
        self.assertEqual(int(discretize(ws, 1).base_blocked.sum()), 0)
        with self.assertRaises(AlreadyDestroyed):
            destroy_obstacle(ws, 1)
        with self.assertRaises(UnknownObstacle):
            destroy_obstacle(ws, 7)

    def test_capabilities(self):
        ws = Workspace(
            (0, 10, 0, 10),
            [rect(1, 2, 2, 4, 4, "ot_1"), rect(2, 6, 6, 8, 8, "wall")],
            [AgentBody(1, (0.5, 0.5), 0.5), AgentBody(2, (9.5, 0.5), 0.5)],
            {"ot_1": [2], "wall": []},
        )
        self.assertTrue(ws.can_destroy(2, 1))
        self.assertFalse(ws.can_destroy(1, 1))
        self.assertFalse(ws.can_destroy(2, 2))


class DiscretizeTests(SimpleTestCase):

    def test_empty_map(self):
        grid = discretize(Workspace((0, 10, 0, 10)), 1)
        self.assertEqual(grid.shape, (10, 10))
        self.assertFalse(grid.base_blocked.any())

    def test_saturated_map(self):
        grid = discretize(Workspace((0, 10, 0, 10), [rect(1, 0, 0, 10, 10)]), 1)
        self.assertTrue(grid.base_blocked.all())

    def test_width_rounds_up(self):
        grid = discretize(Workspace((0, 10.5, 0, 3)), 1)
        self.assertEqual(grid.shape, (11, 3))

    def test_too_coarse(self):
        ws = Workspace((0, 10, 0, 10), [], [AgentBody(1, (1, 1), 0.6)])
        with self.assertRaises(ResolutionTooCoarse):
            discretize(ws, 1)

    def test_boundary_touch_blocks_both_cells(self):
        grid = discretize(Workspace((0, 10, 0, 10), [rect(1, 3, 3, 4, 4)]), 1)
        blocked = {tuple(c) for c in np.argwhere(grid.base_blocked)}
        self.assertEqual(blocked, {(i, j) for i in range(2, 5) for j in range(2, 5)})

    def test_matches_cell_oracle(self):
        rng = random.Random(11)
        for _ in range(60):
            ws = random_workspace(rng)
            res = rng.choice([0.5, 1.0, 1.5])
            grid = discretize(ws, res)
            for i in range(grid.width):
                for j in range(grid.height):
                    square = box(i * res, j * res, (i + 1) * res, (j + 1) * res)
                    expected = any(not o.polygon.disjoint(square) for o in ws.obstacles)
                    self.assertEqual(bool(grid.base_blocked[i, j]), expected, (i, j, res))

    def test_destroy_shrinks_blocked_set(self):
        rng = random.Random(3)
        for _ in range(20):
            ws = random_workspace(rng)
            before = discretize(ws, 1).base_blocked
            destroy_obstacle(ws, 1)
            after = discretize(ws, 1).base_blocked
            self.assertFalse((after & ~before).any())

    def test_rebuild_without_equals_full_rebuild(self):
        rng = random.Random(5)
        for _ in range(30):
            ws = random_workspace(rng, count=5)
            grid = double_outline(discretize(ws, 1))
            gone = rng.sample(range(1, 6), 2)
            for obstacle_id in gone:
                destroy_obstacle(ws, obstacle_id)
            self.assertEqual(rebuild_without(grid, gone), double_outline(discretize(ws, 1)))


class OutlineTests(SimpleTestCase):

    def blocked(self, cells, size=8):
        array = np.zeros((size, size), dtype=bool)
        for cell in cells:
            array[cell] = True
        return double_outline(Grid.from_blocked(array))

    def test_interior_cell(self):
        grid = self.blocked([(4, 4)])
        self.assertEqual(int(grid.outlined_blocked.sum()), 9)
        self.assertEqual(int(grid.base_blocked.sum()), 1)

    def test_corner_cell(self):
        self.assertEqual(int(self.blocked([(0, 0)]).outlined_blocked.sum()), 4)

    def test_square_grows_to_four_by_four(self):
        grid = self.blocked([(3, 3), (3, 4), (4, 3), (4, 4)])
        expected = np.zeros((8, 8), dtype=bool)
        expected[2:6, 2:6] = True
        self.assertTrue(np.array_equal(grid.outlined_blocked, expected))

    def test_monotone(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            grid = double_outline(Grid.from_blocked(rng.random((9, 7)) < 0.2))
            self.assertFalse((grid.base_blocked & ~grid.outlined_blocked).any())

    def test_approach_cells(self):
        ws = Workspace((0, 20, 0, 20), [rect(1, 9.2, 9.2, 9.8, 9.8)])
        grid = double_outline(discretize(ws, 1))
        cells = approach_cells(grid, 1)
        self.assertIn((7, 9), cells)
        self.assertNotIn((8, 9), cells)
        self.assertNotIn((6, 9), cells)


class BresenhamTests(SimpleTestCase):

    def test_degenerate(self):
        self.assertEqual(bresenham_cells((0, 0), (0, 0)), [(0, 0)])

    def test_axis_aligned(self):
        self.assertEqual(bresenham_cells((0, 0), (3, 0)), [(0, 0), (1, 0), (2, 0), (3, 0)])

    def test_shallow_line(self):
        self.assertEqual(bresenham_cells((0, 0), (5, 2)), midpoint_oracle((0, 0), (5, 2)))
        self.assertEqual(bresenham_cells((0, 0), (5, 2)), [(0, 0), (1, 0), (2, 1), (3, 1), (4, 2), (5, 2)])

    def test_random_against_oracle(self):
        rng = random.Random(2)
        for _ in range(500):
            a = (rng.randrange(30), rng.randrange(30))
            b = (rng.randrange(30), rng.randrange(30))
            cells = bresenham_cells(a, b)
            self.assertEqual(cells, midpoint_oracle(a, b))
            self.assertEqual(cells, list(reversed(bresenham_cells(b, a))))
            self.assertEqual(cells[0], a)
            self.assertEqual(cells[-1], b)


class LineOfSightTests(SimpleTestCase):

    def test_adjacent_free(self):
        grid = Grid.from_blocked(np.zeros((5, 5), dtype=bool))
        self.assertTrue(los(grid, (1, 1), (2, 2)))

    def test_wall(self):
        array = np.zeros((7, 7), dtype=bool)
        array[3, :] = True
        grid = double_outline(Grid.from_blocked(array))
        self.assertFalse(los(grid, (0, 0), (6, 6)))

    def test_out_of_bounds(self):
        grid = Grid.from_blocked(np.zeros((5, 5), dtype=bool))
        with self.assertRaises(OutOfBounds):
            los(grid, (0, 0), (5, 1))

    def test_symmetric(self):
        rng = np.random.default_rng(4)
        grid = double_outline(Grid.from_blocked(rng.random((10, 10)) < 0.08))
        for a in grid.cells():
            for b in grid.cells():
                self.assertEqual(los(grid, a, b), los(grid, b, a))

    def test_sound_on_outlined_grids(self):
        rng = random.Random(17)
        for _ in range(500):
            ws = random_workspace(rng, size=10, count=rng.randint(1, 4))
            grid = double_outline(discretize(ws, 1))
            free = list(grid.free_cells())
            if len(free) < 2:
                continue
            for _ in range(6):
                a, b = rng.choice(free), rng.choice(free)
                if los(grid, a, b):
                    self.assertTrue(segment_clear(ws, grid.cell_center(a), grid.cell_center(b)))
                    segment = LineString([grid.cell_center(a), grid.cell_center(b)])
                    for cell in map(tuple, np.argwhere(grid.base_blocked)):
                        self.assertFalse(grid.cell_box(cell).intersects(segment))
