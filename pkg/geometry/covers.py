import logging
from dataclasses import dataclass
from typing import List, Sequence, Union

import numpy as np
from scipy.spatial.distance import cdist

from errors import DimensionMismatchError, EmptySetError, InvalidInputError

log = logging.getLogger(__name__)

FARTHEST_FROM_CENTROID = "farthest_from_centroid"


@dataclass(frozen=True)
class BallCover:
    """Finite family of closed balls B(c_j, r_j)."""
    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=np.float64).ravel()
        if radii.size == 0:
            raise EmptySetError("a ball cover needs at least one ball")
        centers = np.atleast_2d(np.asarray(self.centers, dtype=np.float64))
        if len(centers) != len(radii):
            raise InvalidInputError(f"{len(centers)} centers but {len(radii)} radii")
        if np.any(radii <= 0):
            raise InvalidInputError("ball radii must be strictly positive")
        centers.flags.writeable = False
        radii.flags.writeable = False
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    def __len__(self) -> int:
        return len(self.radii)

    def contains(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.dim:
            raise DimensionMismatchError(self.dim, x.shape[1], "point")
        return np.any(cdist(x, self.centers) <= self.radii[None, :], axis=1)

    def to_dict(self) -> dict:
        return {"dim": self.dim,
                "balls": [{"c": c.tolist(), "r": float(r)} for c, r in zip(self.centers, self.radii)]}

    @staticmethod
    def from_dict(data: dict) -> "BallCover":
        try:
            balls = data["balls"]
            cover = BallCover(np.array([b["c"] for b in balls], dtype=np.float64),
                              np.array([b["r"] for b in balls], dtype=np.float64))
        except (KeyError, TypeError) as e:
            raise InvalidInputError(f"malformed ball cover: {e}") from e
        if "dim" in data and int(data["dim"]) != cover.dim:
            raise DimensionMismatchError(int(data["dim"]), cover.dim, "ball centers")
        return cover


def voxel_downsample(points: Sequence[Sequence[float]], voxel: float) -> np.ndarray:
    """Keeps the first point (in input order) of every occupied cell floor(p / voxel)."""
    if voxel <= 0:
        raise InvalidInputError(f"voxel size must be positive, got {voxel}")
    points = np.asarray(points, dtype=np.float64)
    if points.size == 0:
        return points.reshape(0, points.shape[1] if points.ndim == 2 else 0)
    cells = np.floor(points / voxel).astype(np.int64)
    _, first = np.unique(cells, axis=0, return_index=True)
    return points[np.sort(first)]


def farthest_point_sampling(points: Sequence[Sequence[float]], k: int,
                            start: Union[int, str] = FARTHEST_FROM_CENTROID) -> List[int]:
    """
    Greedy k-center selection.
    Each step picks the point with the largest distance to the selected set; ties go to the lowest index.
    The default start is the point farthest from the centroid.
    """
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if not 1 <= k <= n:
        raise InvalidInputError(f"k must lie in [1, {n}], got {k}")

    if start == FARTHEST_FROM_CENTROID:
        first = int(np.argmax(np.linalg.norm(points - points.mean(axis=0), axis=1)))
    elif isinstance(start, (int, np.integer)) and 0 <= start < n:
        first = int(start)
    else:
        raise InvalidInputError(f"unknown start rule {start!r}")

    selected = [first]
    min_dist = cdist(points, points[first:first + 1]).ravel()
    min_dist[first] = -np.inf
    while len(selected) < k:
        nxt = int(np.argmax(min_dist))
        selected.append(nxt)
        min_dist = np.minimum(min_dist, cdist(points, points[nxt:nxt + 1]).ravel())
        # chosen points never win again, even when duplicates tie them at 0
        min_dist[selected] = -np.inf
    return selected


def ball_cover_from_positives(points: Sequence[Sequence[float]], eps: float, voxel_ratio: float = 0.6,
                              budget: int = 120) -> BallCover:
    """Voxel thinning with v = eps * voxel_ratio, then FPS down to the budget; every ball has radius eps."""
    if eps <= 0:
        raise InvalidInputError(f"eps must be positive, got {eps}")
    if not 0 < voxel_ratio <= 1:
        raise InvalidInputError(f"voxel_ratio must lie in (0, 1], got {voxel_ratio}")
    if budget < 1:
        raise InvalidInputError(f"budget must be at least 1, got {budget}")
    points = np.asarray(points, dtype=np.float64)
    if len(points) == 0:
        raise EmptySetError("no positive points to cover")

    survivors = voxel_downsample(points, eps * voxel_ratio)
    k = min(budget, len(survivors))
    chosen = farthest_point_sampling(survivors, k)
    log.info("ball cover: %d positives -> %d voxel survivors -> %d centers", len(points), len(survivors), k)
    return BallCover(survivors[chosen], np.full(k, float(eps)))
