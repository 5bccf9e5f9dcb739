import logging
import math
import warnings
from dataclasses import asdict, dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit

from errors import InvalidInputError
from geometry.facets import ConvexComponent

log = logging.getLogger(__name__)


def _check_confidence(name: str, value: float, allow_half: bool = False) -> None:
    upper_ok = value <= 0.5 if allow_half else value < 0.5
    if not (0.0 < value and upper_ok):
        raise InvalidInputError(f"{name} must lie in (0, 1/2{']' if allow_half else ')'}, got {value}")


def log_odds(p: float) -> float:
    """a(p) = ln((1 - p) / p); the logistic preimage distance of confidence level p."""
    return math.log((1.0 - p) / p)


def band_halfwidth(kappa: float, eta: float) -> float:
    """
    Half-width w_eta = ln((1 - eta) / eta) / kappa of the slab around a facet line
    where a gate of sharpness kappa is neither above 1 - eta nor below eta.
    """
    if kappa <= 0:
        raise InvalidInputError(f"kappa must be positive, got {kappa}")
    _check_confidence("eta", eta)
    return log_odds(eta) / kappa


def sharpness_for(t: float, eps_conf: float) -> float:
    """Smallest kappa for which a gate reaches confidence 1 - eps_conf at distance t."""
    if t <= 0:
        raise InvalidInputError(f"distance t must be positive, got {t}")
    _check_confidence("eps_conf", eps_conf, allow_half=True)
    return log_odds(eps_conf) / t


@dataclass(frozen=True)
class GateParams:
    """
    Sharpness and tolerance constants of the two-layer gate construction.
    :param kappa: inner gate sharpness, None until the caller fixes it
    :param lam: outer (component) sharpness
    :param eta: inner confidence tolerance
    :param delta: outer confidence tolerance
    """
    kappa: Optional[float]
    lam: float
    eta: float
    delta: float

    def __post_init__(self):
        if self.kappa is not None and self.kappa <= 0:
            raise InvalidInputError(f"kappa must be positive, got {self.kappa}")
        if self.lam <= 0:
            raise InvalidInputError(f"lambda must be positive, got {self.lam}")
        _check_confidence("eta", self.eta)
        _check_confidence("delta", self.delta)

    @property
    def a_delta(self) -> float:
        return log_odds(self.delta)

    @property
    def lambda_floor(self) -> float:
        return 4.0 * self.a_delta

    def with_kappa(self, kappa: float) -> "GateParams":
        return replace(self, kappa=float(kappa))

    def to_dict(self) -> dict:
        return asdict(self)


def margin_params(max_facets: int, components: int, kappa: Optional[float] = None) -> GateParams:
    """Defaults at half the admissible bounds: eta = 1/(8M), delta = 1/(8R), lambda = 4 ln((1 - delta) / delta)."""
    if max_facets < 1 or components < 1:
        raise InvalidInputError(f"M and R must be at least 1, got M={max_facets}, R={components}")
    eta = 1.0 / (8 * max_facets)
    delta = 1.0 / (8 * components)
    return GateParams(kappa=kappa, lam=4.0 * log_odds(delta), eta=eta, delta=delta)


def _violation(message: str, enforce: bool) -> None:
    if enforce:
        raise InvalidInputError(message)
    warnings.warn(message)
    log.warning("%s (overridden)", message)


def check_params(params: GateParams, max_facets: int, components: int, enforce: bool = True) -> GateParams:
    """
    Validates the tolerances against M and R and applies the lambda floor.
    With `enforce` off, violations only warn and the caller's lambda is kept as given.
    """
    if not params.eta < 1.0 / (4 * max_facets):
        _violation(f"eta={params.eta} must be below 1/(4M) = {1.0 / (4 * max_facets)}", enforce)
    if not params.delta <= 1.0 / (4 * components):
        _violation(f"delta={params.delta} must not exceed 1/(4R) = {1.0 / (4 * components)}", enforce)
    if params.lam < params.lambda_floor:
        if enforce:
            log.info("raising lambda from %g to the floor 4 a_delta = %g", params.lam, params.lambda_floor)
            return replace(params, lam=params.lambda_floor)
        _violation(f"lambda={params.lam} is below the floor 4 a_delta = {params.lambda_floor:.4f}", enforce)
    return params


def gate_values(comp: ConvexComponent, kappa: float, x: np.ndarray) -> np.ndarray:
    """Gate outputs sigma(kappa (h - <u, x>)), shape (N, m)."""
    return expit(kappa * comp.inside_distances(x))


def component_scores(comps: Sequence[ConvexComponent], kappa: float, x: np.ndarray) -> np.ndarray:
    """Centered component scores (sum of gates minus m - 1/2), shape (N, R)."""
    return np.column_stack([gate_values(c, kappa, x).sum(axis=1) - (len(c) - 0.5) for c in comps])


def gate_band_mask(comps: Sequence[ConvexComponent], kappa: float, eta: float, x: np.ndarray) -> np.ndarray:
    """Points strictly inside the w_eta slab of at least one facet line (the set B_kappa)."""
    w = band_halfwidth(kappa, eta)
    return np.any(np.column_stack([np.abs(c.inside_distances(x)) < w for c in comps]), axis=1)


def component_band_mask(comps: Sequence[ConvexComponent], params: GateParams, x: np.ndarray) -> np.ndarray:
    """Points where some outer unit lies strictly between delta and 1 - delta."""
    if params.kappa is None:
        raise InvalidInputError("kappa must be set to evaluate component bands")
    scores = component_scores(comps, params.kappa, x)
    return np.any(np.abs(params.lam * scores) < params.a_delta, axis=1)


def union_indicator(comps: Sequence[ConvexComponent], x: np.ndarray) -> np.ndarray:
    return np.any(np.column_stack([c.contains(x) for c in comps]), axis=1)
