from dataclasses import dataclass

import numpy as np
import pandas as pd

from errors import DimensionMismatchError, InvalidInputError
from geometry.box import Box
from model.network_spec import NetworkSpec
from model.sigmoid_mlp import predict_proba

# corner order of a grid cell: top-left, top-right, bottom-right, bottom-left
# edge k joins corner k and corner k + 1: top, right, bottom, left
TOP, RIGHT, BOTTOM, LEFT = range(4)


@dataclass(frozen=True, eq=False)
class DecisionMap:
    """Probabilities on the cell centers of a grid_n x grid_n grid; row 0 is the top (largest y)."""
    values: np.ndarray
    window: Box
    tau: float = 0.5

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise InvalidInputError(f"decision map must be square, got {self.values.shape}")
        if np.any((self.values < 0) | (self.values > 1)):
            raise InvalidInputError("decision map values must lie in [0, 1]")

    @property
    def grid_n(self) -> int:
        return self.values.shape[0]

    def to_ppm_bytes(self) -> bytes:
        """Binary P6 image, gray level round(255 p) in all three channels."""
        gray = np.rint(self.values * 255.0).astype(np.uint8)
        rgb = np.repeat(gray[:, :, None], 3, axis=2)
        header = f"P6\n{self.grid_n} {self.grid_n}\n255\n".encode("ascii")
        return header + rgb.tobytes()

    def write_ppm(self, path: str) -> None:
        with open(path, "wb") as f:
            f.write(self.to_ppm_bytes())

    def contour(self) -> np.ndarray:
        """tau-level segments in window coordinates, shape (K, 4) as x0, y0, x1, y1."""
        segments = marching_squares(self.values, self.tau)
        _, _, (dx, dy) = self.window.grid_axes(self.grid_n)
        # (row, col) grid coordinates -> window coordinates, row 0 at the top
        x = self.window.lo[0] + (segments[:, [1, 3]] + 0.5) * dx
        y = self.window.hi[1] - (segments[:, [0, 2]] + 0.5) * dy
        return np.column_stack([x[:, 0], y[:, 0], x[:, 1], y[:, 1]])

    def contour_frame(self) -> pd.DataFrame:
        segments = self.contour()
        df = pd.DataFrame(segments, columns=["x0", "y0", "x1", "y1"])
        df.insert(0, "segment", np.arange(len(segments)))
        return df

    def write_contour_csv(self, path: str) -> None:
        self.contour_frame().to_csv(path, index=False)


def render_decision_map(spec: NetworkSpec, window: Box, grid_n: int = 200, tau: float = 0.5) -> DecisionMap:
    """Evaluates the network's probability on the cell centers of the window."""
    if spec.input_dim != 2:
        raise DimensionMismatchError(2, spec.input_dim, "network input")
    if window.dim != 2:
        raise DimensionMismatchError(2, window.dim, "window")
    if grid_n < 2:
        raise InvalidInputError(f"grid_n must be at least 2, got {grid_n}")
    xs, ys, _ = window.grid_axes(grid_n)
    gx, gy = np.meshgrid(xs, ys[::-1])
    probs = predict_proba(spec, np.column_stack([gx.ravel(), gy.ravel()]))
    return DecisionMap(probs.reshape(grid_n, grid_n), window, tau)


def _edge_points(values: np.ndarray, level: float):
    """Crossing flags and interpolated (row, col) crossing points of the four edges of every cell."""
    corners = [(values[:-1, :-1], 0, 0), (values[:-1, 1:], 0, 1), (values[1:, 1:], 1, 1), (values[1:, :-1], 1, 0)]
    rows, cols = np.meshgrid(np.arange(values.shape[0] - 1), np.arange(values.shape[1] - 1), indexing="ij")
    above = [v >= level for v, _, _ in corners]
    crossing, points = [], []
    for k in range(4):
        (va, ra, ca), (vb, rb, cb) = corners[k], corners[(k + 1) % 4]
        crosses = above[k] != above[(k + 1) % 4]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(crosses, (level - va) / (vb - va), 0.0)
        crossing.append(crosses)
        points.append(np.stack([rows + ra + t * (rb - ra), cols + ca + t * (cb - ca)], axis=-1))
    return above, np.stack(crossing, axis=-1), np.stack(points, axis=-2)


def marching_squares(values: np.ndarray, level: float) -> np.ndarray:
    """
    Segments of the `level` isoline of a grid of samples, as rows (r0, c0, r1, c1) in grid index units.
    A corner counts as inside when its value is >= level. Saddle cells are split according to the
    mean of their four corners. Segments come out in row-major cell order.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or min(values.shape) < 2:
        raise InvalidInputError(f"marching squares needs a 2-D grid of at least 2 x 2, got {values.shape}")
    above, crossing, points = _edge_points(values, level)
    count = crossing.sum(axis=-1)
    n_cols = values.shape[1] - 1

    cell_ids, starts, ends = [], [], []

    single = np.argwhere(count == 2)
    if len(single):
        edges = np.argsort(~crossing[single[:, 0], single[:, 1]], axis=-1, kind="stable")[:, :2]
        cell_points = points[single[:, 0], single[:, 1]]
        take = np.arange(len(single))
        cell_ids.append(single[:, 0] * n_cols + single[:, 1])
        starts.append(cell_points[take, edges[:, 0]])
        ends.append(cell_points[take, edges[:, 1]])

    saddle = np.argwhere(count == 4)
    if len(saddle):
        r, c = saddle[:, 0], saddle[:, 1]
        center_above = (values[r, c] + values[r, c + 1] + values[r + 1, c + 1] + values[r + 1, c]) / 4.0 >= level
        # isolate the top-right and bottom-left corners, or the top-left and bottom-right ones
        split_tr_bl = above[0][r, c] == center_above
        first = np.where(split_tr_bl[:, None], [TOP, RIGHT], [LEFT, TOP])
        second = np.where(split_tr_bl[:, None], [BOTTOM, LEFT], [RIGHT, BOTTOM])
        cell_points = points[r, c]
        take = np.arange(len(saddle))
        for pair in (first, second):
            cell_ids.append(r * n_cols + c)
            starts.append(cell_points[take, pair[:, 0]])
            ends.append(cell_points[take, pair[:, 1]])

    if not cell_ids:
        return np.zeros((0, 4))
    ids = np.concatenate(cell_ids)
    order = np.argsort(ids, kind="stable")
    return np.column_stack([np.concatenate(starts), np.concatenate(ends)])[order]
