import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from errors import DimensionMismatchError, InvalidInputError

UNIT_TOL = 1e-12


@dataclass(frozen=True)
class Facet:
    """Half-space {x : <u, x> <= h} with a unit outward normal u."""
    normal: tuple
    support: float

    def __post_init__(self):
        norm = math.sqrt(sum(v * v for v in self.normal))
        if abs(norm - 1.0) > UNIT_TOL:
            raise InvalidInputError(f"facet normal {self.normal} is not unit length (|u| = {norm})")

    @property
    def dim(self) -> int:
        return len(self.normal)


@dataclass(frozen=True)
class ConvexComponent:
    """Intersection of facet half-spaces; `bounded` is asserted by the caller."""
    facets: tuple
    bounded: bool = True

    def __post_init__(self):
        if not self.facets:
            raise InvalidInputError("a convex component needs at least one facet")
        dims = {f.dim for f in self.facets}
        if len(dims) != 1:
            raise InvalidInputError(f"facet normals have mixed dimensions {sorted(dims)}")

    @staticmethod
    def from_arrays(normals: np.ndarray, supports: np.ndarray, bounded: bool = True) -> "ConvexComponent":
        return ConvexComponent(tuple(Facet(tuple(float(v) for v in u), float(h))
                                     for u, h in zip(normals, supports)), bounded)

    @property
    def dim(self) -> int:
        return self.facets[0].dim

    def __len__(self) -> int:
        return len(self.facets)

    @property
    def normals(self) -> np.ndarray:
        return np.array([f.normal for f in self.facets], dtype=np.float64)

    @property
    def supports(self) -> np.ndarray:
        return np.array([f.support for f in self.facets], dtype=np.float64)

    def inside_distances(self, x: np.ndarray) -> np.ndarray:
        """Signed distances h_l - <u_l, x>, positive on the inner side; shape (N, m)."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.dim:
            raise DimensionMismatchError(self.dim, x.shape[1], "point")
        return self.supports[None, :] - x @ self.normals.T

    def contains(self, x: np.ndarray, tol: float = 0.0) -> np.ndarray:
        return np.all(self.inside_distances(x) >= -tol, axis=1)

    def to_dict(self) -> dict:
        return {"u": self.normals.tolist(), "h": self.supports.tolist()}

    @staticmethod
    def from_dict(data: dict) -> "ConvexComponent":
        try:
            return ConvexComponent.from_arrays(np.asarray(data["u"], dtype=np.float64),
                                               np.asarray(data["h"], dtype=np.float64))
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, InvalidInputError):
                raise
            raise InvalidInputError(f"malformed convex component: {e}") from e


def polygon_facets(vertices: Sequence[Sequence[float]]) -> ConvexComponent:
    """
    Facets of a strictly convex CCW polygon.
    Edge e_i = v_{i+1} - v_i gets the right-hand normal (e_y, -e_x) / |e|, which is outward for
    CCW order, and support h_i = <u_i, v_i>.
    """
    v = np.asarray(vertices, dtype=np.float64)
    if v.ndim != 2 or v.shape[1] != 2:
        raise InvalidInputError(f"expected a list of 2-D vertices, got shape {v.shape}")
    if len(v) < 3:
        raise InvalidInputError(f"a polygon needs at least 3 vertices, got {len(v)}")

    n = len(v)
    for i in range(n):
        a, b, c = v[i - 1], v[i], v[(i + 1) % n]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if cross <= 0:
            kind = "collinear" if cross == 0 else "clockwise"
            raise InvalidInputError(f"vertex {i} makes a {kind} turn; vertices must be strictly convex CCW")

    edges = np.roll(v, -1, axis=0) - v
    lengths = np.linalg.norm(edges, axis=1)
    normals = np.column_stack([edges[:, 1], -edges[:, 0]]) / lengths[:, None]
    supports = np.einsum("ij,ij->i", normals, v)
    return ConvexComponent.from_arrays(normals, supports)


def _fibonacci_sphere(m: int) -> np.ndarray:
    golden = math.pi * (3.0 - math.sqrt(5.0))
    k = np.arange(m)
    z = 1.0 - 2.0 * (k + 0.5) / m
    radius = np.sqrt(1.0 - z * z)
    return np.column_stack([radius * np.cos(golden * k), radius * np.sin(golden * k), z])


def sphere_normals(m: int, dim: int, seed: int = 0) -> np.ndarray:
    """Regular polygon normals in the plane, a Fibonacci sphere in 3-D, seeded Gaussian directions above."""
    if dim == 2:
        angles = 2.0 * math.pi * np.arange(m) / m
        normals = np.column_stack([np.cos(angles), np.sin(angles)])
    elif dim == 3:
        normals = _fibonacci_sphere(m)
    else:
        normals = np.random.default_rng(seed).standard_normal((m, dim))
    return normals / np.linalg.norm(normals, axis=1, keepdims=True)


def ball_polytope(center: Sequence[float], radius: float, m: int, dim: Optional[int] = None,
                  seed: int = 0) -> ConvexComponent:
    """Circumscribed polytope of the ball B(c, r): supports h = <u, c> + r."""
    c = np.asarray(center, dtype=np.float64)
    dim = len(c) if dim is None else dim
    if len(c) != dim:
        raise DimensionMismatchError(dim, len(c), "ball center")
    if radius <= 0:
        raise InvalidInputError(f"ball radius must be positive, got {radius}")
    if m < dim + 1:
        raise InvalidInputError(f"{m} facets cannot bound a polytope in dimension {dim} (need at least {dim + 1})")
    normals = sphere_normals(m, dim, seed)
    return ConvexComponent.from_arrays(normals, normals @ c + radius)


def circumscribed_error(m: int, radius: float) -> float:
    """Hausdorff distance r (sec(pi/m) - 1) between a disk and its circumscribed regular m-gon."""
    if m < 3:
        raise InvalidInputError(f"a circumscribed polygon needs m >= 3, got {m}")
    return radius * (1.0 / math.cos(math.pi / m) - 1.0)


def facet_count_for_tolerance(radius: float, eps_poly: float, dim: int = 2) -> int:
    """
    Facets needed for a circumscribed polytope within eps_poly of a ball of the given radius.
    Exact scan in the plane; C_d (r / eps)^((d-1)/2) with C_d = pi^((d-1)/2) above.
    """
    if radius <= 0 or eps_poly <= 0:
        raise InvalidInputError(f"radius and eps_poly must be positive, got {radius}, {eps_poly}")
    if dim < 2:
        raise InvalidInputError(f"dimension must be at least 2, got {dim}")
    if dim == 2:
        # sec(pi/m) - 1 <= eps/r  <=>  m >= pi / arccos(r / (r + eps))
        m = max(3, math.ceil(math.pi / math.acos(radius / (radius + eps_poly))) - 1)
        while circumscribed_error(m, radius) > eps_poly:
            m += 1
        while m > 3 and circumscribed_error(m - 1, radius) <= eps_poly:
            m -= 1
        return m
    exponent = (dim - 1) / 2.0
    return max(dim + 1, math.ceil(math.pi ** exponent * (radius / eps_poly) ** exponent))
