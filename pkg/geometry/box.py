from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from errors import InvalidInputError


@dataclass(frozen=True)
class Box:
    """Axis-aligned window [lo_1, hi_1] x ... x [lo_d, hi_d]."""
    lo: Tuple[float, ...]
    hi: Tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or len(self.lo) == 0:
            raise InvalidInputError(f"box bounds {self.lo} / {self.hi} do not match")
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise InvalidInputError(f"box {self.lo} / {self.hi} is empty")

    @staticmethod
    def square(lo: float, hi: float, dim: int = 2) -> "Box":
        return Box(tuple([float(lo)] * dim), tuple([float(hi)] * dim))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.hi, self.lo)))

    def contains(self, x: Sequence[float]) -> bool:
        x = np.asarray(x, dtype=np.float64)
        return bool(np.all(x >= self.lo) and np.all(x <= self.hi))

    def cell_size(self, n: int) -> np.ndarray:
        return (np.asarray(self.hi) - np.asarray(self.lo)) / n

    def axis_centers(self, n: int) -> Tuple[np.ndarray, ...]:
        """Cell centers along every axis of an n x ... x n grid."""
        size = self.cell_size(n)
        return tuple(lo + (np.arange(n) + 0.5) * s for lo, s in zip(self.lo, size))

    def grid_points(self, n: int) -> np.ndarray:
        """All n**d cell centers, shape (n**d, d), in C order of the 'ij' mesh."""
        mesh = np.meshgrid(*self.axis_centers(n), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def grid_axes(self, n: int) -> Tuple[np.ndarray, np.ndarray, Tuple[float, float]]:
        """Planar helper: x centers, y centers and the cell size."""
        if self.dim != 2:
            raise InvalidInputError(f"expected a planar window, got dimension {self.dim}")
        xs, ys = self.axis_centers(n)
        size = self.cell_size(n)
        return xs, ys, (float(size[0]), float(size[1]))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))

    def to_list(self) -> list:
        return [list(self.lo), list(self.hi)]
