from collections import Counter
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from scipy.spatial import ConvexHull

from errors import InvalidInputError
from tropical.polynomial import TropicalPolynomial

# coplanarity / tie tolerance shared by the hull and curve code
GEOM_TOL = 1e-9


def polygon_area(vertices: np.ndarray) -> float:
    """Shoelace area of a CCW polygon; zero for points and segments."""
    vertices = np.asarray(vertices, dtype=np.float64)
    if len(vertices) < 3:
        return 0.0
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _affine_rank(points: np.ndarray) -> int:
    if len(points) < 2:
        return 0
    return int(np.linalg.matrix_rank(points - points[0], tol=GEOM_TOL))


def newton_polytope(poly: TropicalPolynomial) -> np.ndarray:
    """
    Vertices of conv{u_k}.
    In the plane they come back in CCW order; a single monomial gives a one-point polygon and a
    collinear support gives its two endpoints. For n != 2 only the vertex set is returned.
    """
    points = poly.exponents.astype(np.float64)
    rank = _affine_rank(points)
    if rank == 0:
        return poly.exponents[:1].copy()
    if rank == 1:
        direction = points[np.argmax(np.linalg.norm(points - points[0], axis=1))] - points[0]
        t = (points - points[0]) @ direction
        return poly.exponents[[int(np.argmin(t)), int(np.argmax(t))]].copy()
    if rank < poly.dimension:
        # lower-dimensional support in n >= 3: no face structure is computed
        return np.unique(poly.exponents, axis=0)
    hull = ConvexHull(points)
    return poly.exponents[hull.vertices].copy()


@dataclass
class DualSubdivision:
    """Regular subdivision of the Newton polygon induced by the coefficients."""
    cells: List[np.ndarray]
    support: np.ndarray
    interior_edge_count: int
    boundary_edge_count: int
    used_point_count: int
    degenerate: bool = False
    non_simplicial_cells: int = field(default=0)

    @property
    def cell_areas(self) -> List[float]:
        return [polygon_area(cell) for cell in self.cells]

    @property
    def support_area(self) -> float:
        return polygon_area(self.support)

    @property
    def edges(self) -> List[Tuple[Tuple[int, int], Tuple[int, int]]]:
        return sorted(_edge_counts(self.cells))


def _edge_counts(cells: List[np.ndarray]) -> Counter:
    counts = Counter()
    for cell in cells:
        if len(cell) < 2:
            continue
        k = len(cell) if len(cell) > 2 else 1
        for i in range(k):
            a = tuple(int(v) for v in cell[i])
            b = tuple(int(v) for v in cell[(i + 1) % len(cell)])
            counts[tuple(sorted((a, b)))] += 1
    return counts


def _upper_chain_1d(t: np.ndarray, c: np.ndarray) -> List[int]:
    """Indices of the upper hull of the planar points (t_k, c_k), left to right."""
    order = sorted(range(len(t)), key=lambda k: (t[k], -c[k]))
    chain: List[int] = []
    for k in order:
        if chain and t[chain[-1]] == t[k]:
            continue
        while len(chain) >= 2:
            o, a = chain[-2], chain[-1]
            cross = (t[a] - t[o]) * (c[k] - c[o]) - (c[a] - c[o]) * (t[k] - t[o])
            if cross >= -GEOM_TOL:
                chain.pop()
            else:
                break
        chain.append(k)
    return chain


def _ccw_cell(points: np.ndarray) -> np.ndarray:
    hull = ConvexHull(points.astype(np.float64))
    return points[hull.vertices]


def dual_subdivision(poly: TropicalPolynomial) -> DualSubdivision:
    """
    Lifts every exponent u_k to (u_k, c_k), keeps the faces of the 3-D hull whose outward
    normal points up (third component > GEOM_TOL) and projects them back to the plane.
    Coplanar hull triangles are merged, so exact coefficient ties show up as cells with more
    than three vertices (counted in `non_simplicial_cells`) instead of being resolved.
    """
    if poly.dimension != 2:
        raise InvalidInputError(f"dual subdivisions are only built for planar polynomials, got n={poly.dimension}")

    exponents = poly.exponents
    points = exponents.astype(np.float64)
    lifted = np.column_stack([points, poly.coefficients])
    support = newton_polytope(poly)

    planar_rank = _affine_rank(points)
    lifted_rank = _affine_rank(lifted)

    if planar_rank == 0:
        return DualSubdivision(cells=[support], support=support, interior_edge_count=0,
                               boundary_edge_count=0, used_point_count=1, degenerate=True)

    if lifted_rank < 2:
        # fewer than three affinely independent lifted points
        return DualSubdivision(cells=[support], support=support, interior_edge_count=0,
                               boundary_edge_count=2, used_point_count=len(support), degenerate=True)

    if planar_rank == 1:
        # collinear support: the upper faces are segments of the lifted chain, each one
        # dual to a full line of the curve (two unbounded sides)
        direction = (support[1] - support[0]).astype(np.float64)
        t = (points - points[0]) @ direction
        chain = _upper_chain_1d(t, poly.coefficients)
        cells = [exponents[[a, b]] for a, b in zip(chain[:-1], chain[1:])]
        return DualSubdivision(cells=cells, support=support, interior_edge_count=0,
                               boundary_edge_count=2 * len(cells), used_point_count=len(chain),
                               degenerate=True)

    if lifted_rank < 3:
        # coefficients are affine in u: every monomial ties at a single point
        cell = support
        counts = _edge_counts([cell])
        return DualSubdivision(cells=[cell], support=support, interior_edge_count=0,
                               boundary_edge_count=len(counts), used_point_count=len(cell),
                               non_simplicial_cells=int(len(cell) > 3))

    hull = ConvexHull(lifted)
    groups: List[Tuple[np.ndarray, set]] = []
    for simplex, equation in zip(hull.simplices, hull.equations):
        if equation[2] <= GEOM_TOL:
            continue
        for plane, members in groups:
            if np.allclose(plane, equation, atol=GEOM_TOL, rtol=0.0):
                members.update(int(i) for i in simplex)
                break
        else:
            groups.append((equation, set(int(i) for i in simplex)))

    cells = [_ccw_cell(exponents[sorted(members)]) for _, members in groups]
    cells.sort(key=lambda cell: tuple(cell.mean(axis=0)))

    counts = _edge_counts(cells)
    used = {tuple(int(v) for v in vertex) for cell in cells for vertex in cell}
    return DualSubdivision(cells=cells,
                           support=support,
                           interior_edge_count=sum(1 for n in counts.values() if n == 2),
                           boundary_edge_count=sum(1 for n in counts.values() if n == 1),
                           used_point_count=len(used),
                           non_simplicial_cells=sum(1 for cell in cells if len(cell) > 3))
