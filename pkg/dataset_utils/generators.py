import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.spatial import KDTree

from dataset_utils.datasets import Dataset
from errors import InvalidInputError
from geometry.box import Box

DISK_RADIUS = 0.8
DISK_CENTERS = ((-0.6, 0.0), (0.6, 0.0))
DISK_WINDOW = Box.square(-2.0, 2.0)


@dataclass(frozen=True)
class SpiralParams:
    """Archimedean spiral r = a + b theta for theta in [theta0, theta1], thickened by half-width w."""
    a: float = 0.0
    b: float = 0.25
    theta0: float = 1.5 * math.pi
    theta1: float = 4.5 * math.pi
    width: float = 0.3
    # centerline samples used for the distance query
    samples: int = 20000

    def __post_init__(self):
        if self.theta1 <= self.theta0:
            raise InvalidInputError(f"empty angle range [{self.theta0}, {self.theta1}]")
        if self.width <= 0:
            raise InvalidInputError(f"spiral half-width must be positive, got {self.width}")
        if self.samples < 2:
            raise InvalidInputError("the centerline needs at least two samples")

    def centerline(self) -> np.ndarray:
        theta = np.linspace(self.theta0, self.theta1, self.samples)
        r = self.a + self.b * theta
        return np.column_stack([r * np.cos(theta), r * np.sin(theta)])

    def distance(self, points: np.ndarray) -> np.ndarray:
        """Distance from each point to the sampled centerline."""
        distances, _ = KDTree(self.centerline()).query(np.atleast_2d(points))
        return distances

    def contains(self, points: np.ndarray) -> np.ndarray:
        return self.distance(points) <= self.width


def disk_indicator(points: np.ndarray, centers: Sequence[Sequence[float]], radius: float) -> np.ndarray:
    points = np.atleast_2d(points)
    inside = np.zeros(len(points), dtype=bool)
    for c in centers:
        inside |= np.sum((points - np.asarray(c, dtype=np.float64)) ** 2, axis=1) <= radius ** 2
    return inside


def disk_centers(case: str, single_center: Optional[Sequence[float]] = None,
                 centers: Sequence[Sequence[float]] = DISK_CENTERS) -> List[List[float]]:
    """Disk centers of a case; the single-disk case uses `single_center`, the first of `centers` by default."""
    if case == "single":
        return [list(single_center) if single_center is not None else list(centers[0])]
    if case == "double":
        return [list(c) for c in centers]
    raise InvalidInputError(f"unknown disk case {case!r}, expected 'single' or 'double'")


def gen_disks(case: str, n: int, seed: int, window: Box = DISK_WINDOW, radius: float = DISK_RADIUS,
              single_center: Optional[Sequence[float]] = None,
              centers: Sequence[Sequence[float]] = DISK_CENTERS) -> Dataset:
    """n uniform points on the window, labeled 1 inside the case's disk(s)."""
    if n < 1:
        raise InvalidInputError(f"n must be at least 1, got {n}")
    chosen = disk_centers(case, single_center, centers)
    x = window.sample(np.random.default_rng(seed), n)
    return Dataset(x, disk_indicator(x, chosen, radius).astype(np.int64))


def gen_swiss(n: int, seed: int, spiral: Optional[SpiralParams] = None,
              window: Box = Box.square(-4.0, 4.0)) -> Dataset:
    """n uniform points on the window, labeled 1 within the spiral's half-width of its centerline."""
    if n < 1:
        raise InvalidInputError(f"n must be at least 1, got {n}")
    spiral = spiral or SpiralParams()
    x = window.sample(np.random.default_rng(seed), n)
    return Dataset(x, spiral.contains(x).astype(np.int64))
