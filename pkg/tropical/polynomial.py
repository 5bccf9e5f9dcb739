import json
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from errors import DimensionMismatchError, InvalidInputError

Monomial = Tuple[Tuple[int, ...], float]


def trop_add(a: float, b: float) -> float:
    """Tropical sum a ⊕ b = max(a, b)."""
    return max(a, b)


def trop_mul(a: float, b: float) -> float:
    """Tropical product a ⊙ b = a + b."""
    return a + b


@dataclass(frozen=True, eq=False)
class TropicalPolynomial:
    """
    Max-plus polynomial F(x) = max_k { c_k + <u_k, x> }.

    Monomials with a -inf coefficient are simply absent. Duplicate exponents are merged
    by keeping the largest coefficient, so `exponents` is always duplicate-free.
    """
    exponents: np.ndarray
    coefficients: np.ndarray

    def __init__(self, monomials: Iterable[Monomial]):
        merged: Dict[Tuple[int, ...], float] = {}
        dim = None
        for u, c in monomials:
            u = tuple(int(e) for e in u)
            c = float(c)
            if dim is None:
                dim = len(u)
            if len(u) != dim or dim < 1:
                raise InvalidInputError(f"exponent {u} does not match dimension {dim}")
            if not np.isfinite(c):
                raise InvalidInputError(f"coefficient of {u} must be finite, got {c}")
            merged[u] = max(c, merged[u]) if u in merged else c
        if not merged:
            raise InvalidInputError("a tropical polynomial needs at least one monomial")

        # keep first-occurrence order: index-ordered perturbation depends on it
        exponents = np.array(list(merged.keys()), dtype=np.int64)
        coefficients = np.array(list(merged.values()), dtype=np.float64)
        exponents.flags.writeable = False
        coefficients.flags.writeable = False
        object.__setattr__(self, "exponents", exponents)
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def dimension(self) -> int:
        return self.exponents.shape[1]

    @property
    def monomials(self) -> List[Monomial]:
        return [(tuple(int(e) for e in u), float(c)) for u, c in zip(self.exponents, self.coefficients)]

    def __len__(self) -> int:
        return len(self.coefficients)

    def terms(self, x: Sequence[float]) -> np.ndarray:
        """Values c_k + <u_k, x> of every monomial at x."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        if x.shape[-1] != self.dimension:
            raise DimensionMismatchError(self.dimension, x.shape[-1], "point")
        return self.coefficients + x @ self.exponents.T

    def __add__(self, other: "TropicalPolynomial") -> "TropicalPolynomial":
        """Tropical sum F ⊕ G."""
        self._check_same_dimension(other)
        return TropicalPolynomial(self.monomials + other.monomials)

    def __mul__(self, other: "TropicalPolynomial") -> "TropicalPolynomial":
        """Tropical product F ⊙ G: exponents add, coefficients add."""
        self._check_same_dimension(other)
        return TropicalPolynomial(
            (tuple(int(a + b) for a, b in zip(u, v)), trop_mul(c, d))
            for u, c in self.monomials
            for v, d in other.monomials
        )

    def perturbed(self, eps: float) -> "TropicalPolynomial":
        """Adds an index-ordered eps * (k + 1) / m to the k-th coefficient to break exact ties."""
        m = len(self)
        return TropicalPolynomial((u, c + eps * (k + 1) / m) for k, (u, c) in enumerate(self.monomials))

    def _check_same_dimension(self, other: "TropicalPolynomial") -> None:
        if other.dimension != self.dimension:
            raise DimensionMismatchError(self.dimension, other.dimension, "polynomial")

    # -----------------------
    #     serialization     -
    # -----------------------
    def to_dict(self) -> dict:
        return {"dim": self.dimension,
                "monomials": [{"u": list(u), "c": c} for u, c in self.monomials]}

    @staticmethod
    def from_dict(data: dict) -> "TropicalPolynomial":
        try:
            poly = TropicalPolynomial((m["u"], m["c"]) for m in data["monomials"])
        except (KeyError, TypeError) as e:
            raise InvalidInputError(f"malformed tropical polynomial: {e}") from e
        if "dim" in data and int(data["dim"]) != poly.dimension:
            raise DimensionMismatchError(int(data["dim"]), poly.dimension, "monomial exponents")
        return poly

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @staticmethod
    def from_json(text: str) -> "TropicalPolynomial":
        return TropicalPolynomial.from_dict(json.loads(text))


def tropical_line(apex: Sequence[float]) -> TropicalPolynomial:
    """0 ⊕ (x - a) ⊕ (y - b): the tropical line with apex (a, b)."""
    a, b = apex
    return TropicalPolynomial([((0, 0), 0.0), ((1, 0), -float(a)), ((0, 1), -float(b))])


def random_polynomial(rng: np.random.Generator, max_monomials: int = 8, max_degree: int = 3,
                      coefficient_scale: float = 2.0) -> TropicalPolynomial:
    """
    Random planar polynomial with a two-dimensional Newton polygon.
    Coefficients are continuous draws, hence generic with probability one.
    """
    lattice = [(i, j) for i in range(max_degree + 1) for j in range(max_degree + 1 - i)]
    while True:
        m = int(rng.integers(3, max_monomials + 1))
        chosen = rng.choice(len(lattice), size=min(m, len(lattice)), replace=False)
        points = np.array([lattice[k] for k in chosen])
        centered = points - points[0]
        if np.linalg.matrix_rank(centered) == 2:
            break
    coefficients = rng.uniform(-coefficient_scale, coefficient_scale, size=len(points))
    return TropicalPolynomial(zip(map(tuple, points), coefficients))


def trop_eval(poly: TropicalPolynomial, x: Sequence[float]) -> float:
    """max_k { c_k + <u_k, x> }."""
    return float(np.max(poly.terms(x)))


def on_hypersurface(poly: TropicalPolynomial, x: Sequence[float], tol: float = 1e-9) -> bool:
    """True iff at least two monomials attain the maximum up to `tol`."""
    if tol <= 0:
        raise InvalidInputError(f"tol must be positive, got {tol}")
    terms = poly.terms(x)
    return int(np.count_nonzero(terms >= terms.max() - tol)) >= 2


def trop_rational_eval(numerator: TropicalPolynomial, denominator: TropicalPolynomial,
                       x: Sequence[float]) -> float:
    """U ⊘ V evaluated at x, i.e. U(x) - V(x)."""
    if numerator.dimension != denominator.dimension:
        raise DimensionMismatchError(numerator.dimension, denominator.dimension, "denominator")
    return trop_eval(numerator, x) - trop_eval(denominator, x)
