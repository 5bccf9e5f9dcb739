import os
import tempfile
import unittest

import numpy as np
import pandas as pd

from compiler.compile import compile_convex
from errors import DimensionMismatchError, InvalidInputError
from experiments.rendering import DecisionMap, marching_squares, render_decision_map
from geometry.box import Box
from geometry.facets import ball_polytope
from geometry.hausdorff import point_set_hausdorff
from model.initializers import init_baseline
from model.network_spec import NetworkSpec, identity_layer, logistic_layer


def constant_half_spec() -> NetworkSpec:
    return NetworkSpec((logistic_layer(np.zeros((2, 2)), np.zeros(2)), identity_layer(np.zeros((1, 2)), [0.0])))


class TestMarchingSquares(unittest.TestCase):
    def test_single_corner(self):
        values = np.array([[1.0, 0.0], [0.0, 0.0]])
        segments = marching_squares(values, 0.5)
        self.assertTrue(np.allclose(segments, [[0.0, 0.5, 0.5, 0.0]]))

    def test_straight_edge(self):
        values = np.array([[1.0, 0.0, 0.0]] * 3)
        segments = marching_squares(values, 0.5)
        self.assertEqual(len(segments), 2)
        self.assertTrue(np.allclose(segments[:, [1, 3]], 0.5))

    def test_no_crossing(self):
        self.assertEqual(marching_squares(np.full((4, 4), 0.2), 0.5).shape, (0, 4))

    def test_saddle_uses_cell_mean(self):
        low_mean = marching_squares(np.array([[0.6, 0.0], [0.0, 0.6]]), 0.5)
        high_mean = marching_squares(np.array([[1.0, 0.4], [0.4, 1.0]]), 0.5)
        self.assertEqual(len(low_mean), 2)
        self.assertEqual(len(high_mean), 2)
        # a low mean cuts off the high top-left corner, a high mean cuts off the low top-right one
        self.assertTrue(any(np.all(seg < 0.5) for seg in low_mean))
        self.assertTrue(any(np.all(seg[[0, 2]] < 0.5) and np.all(seg[[1, 3]] > 0.5) for seg in high_mean))

    def test_bad_grid(self):
        with self.assertRaises(InvalidInputError):
            marching_squares(np.zeros(4), 0.5)


class TestDecisionMap(unittest.TestCase):
    def test_constant_map_is_mid_gray(self):
        dmap = render_decision_map(constant_half_spec(), Box.square(-2, 2), 16)
        self.assertTrue(np.all(dmap.values == 0.5))
        data = dmap.to_ppm_bytes()
        header = b"P6\n16 16\n255\n"
        self.assertTrue(data.startswith(header))
        self.assertEqual(len(data), len(header) + 16 * 16 * 3)
        self.assertEqual(set(data[len(header):]), {128})
        # every corner sits on the level, so none of them crosses
        self.assertEqual(len(dmap.contour()), 0)

    def test_image_size(self):
        spec = init_baseline("xavier", [2, 8, 1], 0)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "map.ppm")
            render_decision_map(spec, Box.square(-2, 2), 37).write_ppm(path)
            with open(path, "rb") as f:
                data = f.read()
        header = b"P6\n37 37\n255\n"
        self.assertTrue(data.startswith(header))
        self.assertEqual(len(data) - len(header), 37 * 37 * 3)

    def test_top_row_is_largest_y(self):
        window = Box.square(-1, 1)
        # logit grows with y, so the top of the image is the bright part
        spec = NetworkSpec((logistic_layer([[0.0, 1.0]], [0.0], k=5.0), identity_layer([[10.0]], [-5.0])))
        dmap = render_decision_map(spec, window, 20)
        self.assertGreater(dmap.values[0].mean(), dmap.values[-1].mean())

    def test_compiled_disk_contour(self):
        window = Box.square(-2, 2)
        n = 200
        spec = compile_convex(ball_polytope((0, 0), 0.8, 32), 30.0)
        dmap = render_decision_map(spec, window, n)
        segments = dmap.contour()
        self.assertGreater(len(segments), 0)
        points = np.vstack([segments[:, :2], segments[:, 2:]])
        angles = np.linspace(0, 2 * np.pi, 2000, endpoint=False)
        circle = 0.8 * np.column_stack([np.cos(angles), np.sin(angles)])
        self.assertLessEqual(point_set_hausdorff(points, circle), 2 * np.hypot(*window.cell_size(n)))

    def test_contour_csv(self):
        spec = compile_convex(ball_polytope((0, 0), 0.8, 8), 30.0)
        dmap = render_decision_map(spec, Box.square(-2, 2), 50)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "contour.csv")
            dmap.write_contour_csv(path)
            df = pd.read_csv(path)
        self.assertEqual(list(df.columns), ["segment", "x0", "y0", "x1", "y1"])
        self.assertEqual(len(df), len(dmap.contour()))

    def test_rejects_bad_input(self):
        with self.assertRaises(DimensionMismatchError):
            render_decision_map(init_baseline("he", [3, 4, 1], 0), Box.square(-2, 2), 10)
        with self.assertRaises(InvalidInputError):
            DecisionMap(np.zeros((3, 4)), Box.square(-2, 2))
        with self.assertRaises(InvalidInputError):
            DecisionMap(np.full((3, 3), 1.5), Box.square(-2, 2))


if __name__ == '__main__':
    unittest.main()
