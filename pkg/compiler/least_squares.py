import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.special import expit

from compiler.gates import band_halfwidth
from errors import IllConditionedError, InvalidInputError
from model.network_spec import NetworkSpec, identity_layer, logistic_layer

log = logging.getLogger(__name__)

# relative ridges tried after a plain Cholesky solve fails
RIDGES = (1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)
# a factor whose condition estimate exceeds this is treated as a failed factorization
MAX_CONDITION = 1e14


def design_matrix(xs: np.ndarray, centers: np.ndarray, k: float) -> np.ndarray:
    """Phi_ij = sigma(k (x_i - p_j)) plus a trailing all-ones column."""
    return np.column_stack([expit(k * (xs[:, None] - centers[None, :])), np.ones(len(xs))])


def _cholesky_condition(factor: np.ndarray) -> float:
    diag = np.abs(np.diag(factor))
    if diag.min() == 0:
        return np.inf
    return float((diag.max() / diag.min()) ** 2)


def solve_normal_equations(phi: np.ndarray, ys: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Solves (Phi^T Phi + r I) alpha = Phi^T y by Cholesky, first with r = 0 and then with
    escalating ridges r = rho * mean(diag(Phi^T Phi)).
    :return: alpha and the ridge that was used
    """
    gram = phi.T @ phi
    rhs = phi.T @ ys
    if not (np.all(np.isfinite(gram)) and np.all(np.isfinite(rhs))):
        raise InvalidInputError("design matrix and targets must be finite")
    scale = float(np.mean(np.diag(gram)))
    condition = np.inf
    ridge = 0.0
    for rho in (0.0,) + RIDGES:
        ridge = rho * scale
        try:
            factor = linalg.cho_factor(gram + ridge * np.eye(len(gram)))
        except linalg.LinAlgError:
            continue
        condition = _cholesky_condition(factor[0])
        if condition > MAX_CONDITION:
            continue
        if rho > 0:
            log.warning("normal equations needed a ridge of %.0e (cond ~ %.3e)", rho, condition)
        return linalg.cho_solve(factor, rhs), ridge
    raise IllConditionedError(condition, ridge)


def ls_initializer_1d(xs: Sequence[float], ys: Sequence[float], centers: Sequence[float],
                      k: float, tau: float = 0.5) -> Tuple[np.ndarray, NetworkSpec]:
    """
    Least-squares fit of y ~ sum_j alpha_j sigma(k (x - p_j)) + alpha_{m+1}.
    :param xs: sample locations
    :param ys: target values at xs
    :param centers: sigmoid centers p_j
    :param k: shared sigmoid sharpness
    :param tau: threshold stored in the head of the returned predictor
    :return: alpha (m + 1 values, bias last) and the predictor as a 1 -> m -> 1 network
    """
    xs = np.asarray(xs, dtype=np.float64).ravel()
    ys = np.asarray(ys, dtype=np.float64).ravel()
    centers = np.asarray(centers, dtype=np.float64).ravel()
    if k <= 0:
        raise InvalidInputError(f"k must be positive, got {k}")
    if len(xs) != len(ys):
        raise InvalidInputError(f"{len(xs)} sample points but {len(ys)} targets")
    if len(centers) == 0:
        raise InvalidInputError("at least one center is required")
    if len(xs) < len(centers) + 1:
        raise InvalidInputError(f"need at least {len(centers) + 1} samples for {len(centers)} centers, got {len(xs)}")

    alpha, ridge = solve_normal_equations(design_matrix(xs, centers, k), ys)
    m = len(centers)
    spec = NetworkSpec((logistic_layer(np.ones((m, 1)), -centers, k=k),
                        identity_layer(alpha[None, :m], [alpha[m]])),
                       tau=tau,
                       provenance={"kind": "ls1d", "centers": centers.tolist(), "k": float(k), "ridge": ridge})
    return alpha, spec


@dataclass(frozen=True)
class Target1D:
    """A 1-D target with the center set and sharpness used to reconstruct it."""
    name: str
    function: Callable[[np.ndarray], np.ndarray]
    centers: Tuple[float, ...]
    k: float
    # points where the target crosses the 1/2 level
    crossings: Tuple[float, ...]
    domain: Tuple[float, float] = (-2.0, 2.0)

    def __call__(self, xs: np.ndarray) -> np.ndarray:
        return self.function(np.asarray(xs, dtype=np.float64))


def _rectangle(x: np.ndarray) -> np.ndarray:
    return (np.abs(x) <= 0.5).astype(np.float64)


def _triangle(x: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, 1.0 - np.abs(x))


def _trapezoid(x: np.ndarray) -> np.ndarray:
    ramp = np.clip((1.0 - x) / 0.5, 0.0, 1.0)
    return np.where(x < -1.0, 0.0, np.where(x <= 0.5, 1.0, ramp))


def _step(x: np.ndarray) -> np.ndarray:
    return (x >= 0.0).astype(np.float64)


TARGETS: Dict[str, Target1D] = {
    "rectangle": Target1D("rectangle", _rectangle, (-0.5, 0.5), 120.0, (-0.5, 0.5)),
    "triangle": Target1D("triangle", _triangle, tuple(np.linspace(-1.0, 1.0, 9)), 20.0, (-0.5, 0.5)),
    "trapezoid": Target1D("trapezoid", _trapezoid, (-1.0, 0.5, 1.0), 20.0, (-1.0, 0.75)),
    "step": Target1D("step", _step, (0.0,), 120.0, (0.0,), domain=(-1.0, 1.0)),
}


def get_target(name: str) -> Target1D:
    try:
        return TARGETS[name]
    except KeyError:
        raise InvalidInputError(f"unknown 1-D target {name!r}, expected one of {sorted(TARGETS)}") from None


def evaluate_1d(spec: NetworkSpec, xs: np.ndarray) -> np.ndarray:
    """Raw output y_hat(x) of a 1-D predictor (before the head threshold)."""
    h = spec.layers[0]
    hidden = expit(h.k * (np.asarray(xs, dtype=np.float64)[:, None] @ h.weight.T + h.bias))
    out = spec.layers[1]
    return (hidden @ out.weight.T + out.bias).ravel()


@dataclass
class FitReport:
    target: str
    alpha: np.ndarray
    accuracy: float
    evaluated: int
    excluded: int
    max_abs_error: float = field(default=float("nan"))


def fit_accuracy_outside_bands(spec: NetworkSpec, target: Target1D, xs: Optional[np.ndarray] = None,
                               eta: float = 0.01) -> Tuple[float, int]:
    """
    Thresholded accuracy of 1{y_hat >= tau} against 1{target >= 1/2}, skipping points within
    w_eta = band_halfwidth(k, eta) of a crossing.
    :return: accuracy and number of evaluated points
    """
    if xs is None:
        xs = np.linspace(target.domain[0], target.domain[1], 2000)
    xs = np.asarray(xs, dtype=np.float64)
    w = band_halfwidth(target.k, eta)
    keep = np.ones(len(xs), dtype=bool)
    for c in target.crossings:
        keep &= np.abs(xs - c) > w
    if not keep.any():
        raise InvalidInputError("every evaluation point falls inside an exclusion band")
    predicted = evaluate_1d(spec, xs[keep]) >= spec.tau
    labels = target(xs[keep]) >= 0.5
    return float(np.mean(predicted == labels)), int(keep.sum())


def fit_target(target: Target1D, n: int = 2000, eta: float = 0.01) -> FitReport:
    """Fits a library target on n uniform points of its domain and scores it on the same grid."""
    xs = np.linspace(target.domain[0], target.domain[1], n)
    ys = target(xs)
    alpha, spec = ls_initializer_1d(xs, ys, target.centers, target.k)
    accuracy, evaluated = fit_accuracy_outside_bands(spec, target, xs, eta)
    return FitReport(target=target.name, alpha=alpha, accuracy=accuracy, evaluated=evaluated,
                     excluded=n - evaluated, max_abs_error=float(np.max(np.abs(evaluate_1d(spec, xs) - ys))))


def list_targets() -> List[str]:
    return sorted(TARGETS)
