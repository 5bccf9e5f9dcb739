import itertools
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from errors import InvalidInputError
from geometry.box import Box
from tropical.polynomial import TropicalPolynomial
from tropical.subdivision import GEOM_TOL, DualSubdivision, dual_subdivision


@dataclass(frozen=True)
class CurveEdge:
    """Maximal piece of the tropical curve on which monomials i and j tie at the max."""
    i: int
    j: int
    point: Tuple[float, float]
    direction: Tuple[float, float]
    t_min: float
    t_max: float

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.t_min) and math.isfinite(self.t_max)

    @property
    def unbounded_sides(self) -> int:
        return int(not math.isfinite(self.t_min)) + int(not math.isfinite(self.t_max))


@dataclass
class TropicalCurve:
    vertices: np.ndarray
    edges: List[CurveEdge]

    @property
    def bounded_edges(self) -> List[CurveEdge]:
        return [e for e in self.edges if e.bounded]

    @property
    def ray_count(self) -> int:
        return sum(e.unbounded_sides for e in self.edges)


@dataclass
class DualityReport:
    curve_vertices: int
    polygons: int
    bounded_edges: int
    interior_edges: int
    rays: int
    boundary_edges: int
    vertices_in_window: int
    non_simplicial_cells: int
    degenerate: bool
    subdivision: DualSubdivision
    curve_raster: Optional[np.ndarray] = None

    @property
    def pairs(self) -> List[Tuple[str, int, int]]:
        return [("vertices/polygons", self.curve_vertices, self.polygons),
                ("bounded edges/interior edges", self.bounded_edges, self.interior_edges),
                ("rays/boundary edges", self.rays, self.boundary_edges)]

    @property
    def matches(self) -> bool:
        return all(a == b for _, a, b in self.pairs)

    def to_dict(self) -> dict:
        return {"curve_vertices": self.curve_vertices, "polygons": self.polygons,
                "bounded_edges": self.bounded_edges, "interior_edges": self.interior_edges,
                "rays": self.rays, "boundary_edges": self.boundary_edges,
                "vertices_in_window": self.vertices_in_window,
                "non_simplicial_cells": self.non_simplicial_cells,
                "degenerate": self.degenerate, "matches": self.matches}


def _scale(poly: TropicalPolynomial) -> float:
    return max(1.0, float(np.max(np.abs(poly.coefficients))))


def curve_vertices(poly: TropicalPolynomial) -> np.ndarray:
    """
    Points where at least three monomials tie at the max.
    Every monomial triple gives a 2x2 tie system; solutions that do not attain the global max are dropped.
    """
    u, c = poly.exponents.astype(np.float64), poly.coefficients
    tol = GEOM_TOL * _scale(poly) * 10
    found: List[np.ndarray] = []
    for i, j, k in itertools.combinations(range(len(poly)), 3):
        a = np.array([u[i] - u[j], u[i] - u[k]])
        if abs(np.linalg.det(a)) < GEOM_TOL:
            continue
        x = np.linalg.solve(a, np.array([c[j] - c[i], c[k] - c[i]]))
        terms = poly.terms(x)
        if terms.max() - terms[i] > tol:
            continue
        if not any(np.allclose(x, y, atol=1e-7 * _scale(poly), rtol=0.0) for y in found):
            found.append(x)
    found.sort(key=lambda p: (p[0], p[1]))
    return np.array(found).reshape(-1, 2)


def curve_edges(poly: TropicalPolynomial) -> List[CurveEdge]:
    """
    For each monomial pair the tie line is clipped to where both monomials stay maximal.
    The clipped piece is convex, so a pair contributes at most one edge.
    """
    u, c = poly.exponents.astype(np.float64), poly.coefficients
    tol = GEOM_TOL * _scale(poly)
    edges = []
    for i, j in itertools.combinations(range(len(poly)), 2):
        delta = u[i] - u[j]
        norm2 = float(delta @ delta)
        point = delta * (c[j] - c[i]) / norm2
        direction = np.array([-delta[1], delta[0]]) / math.sqrt(norm2)
        lo, hi = -math.inf, math.inf
        feasible = True
        for k in range(len(poly)):
            if k in (i, j):
                continue
            # monomial k stays below monomial i along point + t * direction
            offset = (c[k] - c[i]) + (u[k] - u[i]) @ point
            slope = (u[k] - u[i]) @ direction
            if abs(slope) < GEOM_TOL:
                if offset > -tol:
                    feasible = False
                    break
                continue
            bound = -offset / slope
            if slope > 0:
                hi = min(hi, bound)
            else:
                lo = max(lo, bound)
        if feasible and hi - lo > tol:
            edges.append(CurveEdge(i, j, tuple(point), tuple(direction), lo, hi))
    return edges


def tropical_curve(poly: TropicalPolynomial) -> TropicalCurve:
    if poly.dimension != 2:
        raise InvalidInputError(f"curves are computed for planar polynomials only, got n={poly.dimension}")
    return TropicalCurve(vertices=curve_vertices(poly), edges=curve_edges(poly))


def rasterize_curve(poly: TropicalPolynomial, window: Box, grid_n: int) -> np.ndarray:
    """
    Boolean grid_n x grid_n mask (row 0 = top) of cells crossed by the tropical curve.
    A cell is marked when the gap between the two largest terms at its center is below the
    largest possible change of that gap across half a cell.
    """
    xs, ys, cell = window.grid_axes(grid_n)
    gx, gy = np.meshgrid(xs, ys[::-1])
    terms = poly.terms(np.stack([gx.ravel(), gy.ravel()], axis=1))
    if terms.shape[1] < 2:
        return np.zeros((grid_n, grid_n), dtype=bool)
    top2 = np.sort(terms, axis=1)[:, -2:]
    spread = np.max(np.abs(poly.exponents[:, None, :] - poly.exponents[None, :, :]).sum(axis=2))
    return (top2[:, 1] - top2[:, 0] <= 0.5 * spread * max(cell)).reshape(grid_n, grid_n)


def duality_report(poly: TropicalPolynomial, window: Box, grid_n: int = 256) -> DualityReport:
    """
    Counts curve features from exact tie solving and pairs them with the dual subdivision:
    vertices with polygons, bounded edges with interior edges, rays with boundary edges.
    Ties that make the subdivision non-simplicial are reported through `non_simplicial_cells`.

    `matches` compares the full curve, since every polygon has a vertex even when it lies outside the window.
    `vertices_in_window` counts only the vertices inside `window`, the same region `curve_raster` covers.
    """
    if grid_n < 64:
        raise InvalidInputError(f"grid_n must be at least 64, got {grid_n}")
    if poly.dimension != 2:
        raise InvalidInputError(f"duality is checked for planar polynomials only, got n={poly.dimension}")

    subdivision = dual_subdivision(poly)
    curve = tropical_curve(poly)
    in_window = int(sum(window.contains(v) for v in curve.vertices))

    # a constant or one-monomial polynomial has an empty curve and an empty cell complex
    polygons = 0 if len(poly) == 1 else (len(subdivision.cells) if not subdivision.degenerate else 0)
    return DualityReport(curve_vertices=len(curve.vertices),
                         polygons=polygons,
                         bounded_edges=len(curve.bounded_edges),
                         interior_edges=subdivision.interior_edge_count,
                         rays=curve.ray_count,
                         boundary_edges=subdivision.boundary_edge_count,
                         vertices_in_window=in_window,
                         non_simplicial_cells=subdivision.non_simplicial_cells,
                         degenerate=subdivision.degenerate,
                         subdivision=subdivision,
                         curve_raster=rasterize_curve(poly, window, grid_n))
