from typing import Callable, Sequence

import numpy as np
from scipy.ndimage import distance_transform_edt
from scipy.spatial.distance import directed_hausdorff

from errors import EmptySetError, InvalidInputError
from geometry.box import Box

# maps an (N, d) array of points to N booleans
Indicator = Callable[[np.ndarray], np.ndarray]


def indicator_mask(indicator: Indicator, window: Box, n: int) -> np.ndarray:
    """Evaluates an indicator on the n x ... x n cell centers of the window ('ij' layout)."""
    values = np.asarray(indicator(window.grid_points(n)), dtype=bool)
    return values.reshape((n,) * window.dim)


def mask_hausdorff(mask_a: np.ndarray, mask_b: np.ndarray, cell_size: Sequence[float]) -> float:
    """Hausdorff distance between two boolean grids sharing the same cell layout."""
    if mask_a.shape != mask_b.shape:
        raise InvalidInputError(f"grid shapes differ: {mask_a.shape} vs {mask_b.shape}")
    if not mask_a.any() or not mask_b.any():
        raise EmptySetError("indicator set is empty on the grid")
    # EDT of the complement gives, for every cell, the distance to the nearest set cell
    to_b = distance_transform_edt(~mask_b, sampling=cell_size)
    to_a = distance_transform_edt(~mask_a, sampling=cell_size)
    return float(max(to_b[mask_a].max(), to_a[mask_b].max()))


def grid_hausdorff(ind_a: Indicator, ind_b: Indicator, window: Box, n: int = 400) -> float:
    """
    Symmetric Hausdorff distance between two sets given by indicators, both restricted to the
    cell centers of an n x ... x n grid over the window.
    The estimate can be off from the continuous value by at most one grid diagonal.
    :param ind_a: indicator of the first set
    :param ind_b: indicator of the second set
    :param window: evaluation box
    :param n: cells per axis, at least 32
    :return: distance in window units
    """
    if n < 32:
        raise InvalidInputError(f"grid resolution must be at least 32, got {n}")
    mask_a = indicator_mask(ind_a, window, n)
    mask_b = indicator_mask(ind_b, window, n)
    return mask_hausdorff(mask_a, mask_b, window.cell_size(n))


def point_set_hausdorff(a: Sequence[Sequence[float]], b: Sequence[Sequence[float]]) -> float:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise EmptySetError("point set is empty")
    return float(max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0]))
