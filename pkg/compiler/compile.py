import logging
from typing import List, Optional, Sequence

import numpy as np

from compiler.gates import GateParams, check_params, margin_params, sharpness_for
from errors import DimensionMismatchError, InvalidInputError
from geometry.covers import BallCover
from geometry.facets import ConvexComponent, ball_polytope, facet_count_for_tolerance
from model.network_spec import NetworkSpec, identity_layer, logistic_layer

log = logging.getLogger(__name__)


def _gate_layer(comps: Sequence[ConvexComponent], kappa: float):
    normals = np.vstack([c.normals for c in comps])
    supports = np.concatenate([c.supports for c in comps])
    return logistic_layer(-kappa * normals, kappa * supports)


def compile_convex(comp: ConvexComponent, kappa: float) -> NetworkSpec:
    """
    One hidden layer of m gates sigma(kappa (h_l - <u_l, x>)) summed with unit weights;
    the head threshold m - 1/2 turns the sum into the membership decision.
    """
    if kappa <= 0:
        raise InvalidInputError(f"kappa must be positive, got {kappa}")
    if not comp.bounded:
        raise InvalidInputError("only bounded components can be compiled")
    m = len(comp)
    layers = (_gate_layer([comp], kappa), identity_layer(np.ones((1, m)), [0.0]))
    provenance = {"kind": "convex", "kappa": float(kappa), "components": [comp.to_dict()]}
    return NetworkSpec(layers, tau=m - 0.5, provenance=provenance)


def compile_union(comps: Sequence[ConvexComponent], params: GateParams, head_scale: Optional[float] = None,
                  head_tau: float = 0.5, enforce_bounds: bool = True) -> NetworkSpec:
    """
    Two-layer union classifier.
    Layer 1 holds every gate of every component, layer 2 one logistic unit sigma(lambda * score) per component
    where score = sum of its gates - (m - 1/2). The head sums the outer units and thresholds at `head_tau`;
    with `head_scale` alpha the head is the affine map alpha (sum - head_tau) thresholded at zero.
    :param comps: bounded components of equal dimension
    :param params: gate constants, kappa must be set
    :param head_scale: optional alpha of the affine OR head
    :param head_tau: threshold on the outer sum
    :param enforce_bounds: reject tolerance violations instead of warning about them
    :return: compiled network
    """
    comps = list(comps)
    if not comps:
        raise InvalidInputError("union of zero components")
    if params.kappa is None:
        raise InvalidInputError("inner sharpness kappa is not set")
    dim = comps[0].dim
    for c in comps:
        if c.dim != dim:
            raise DimensionMismatchError(dim, c.dim, "component")
        if not c.bounded:
            raise InvalidInputError("only bounded components can be compiled")

    sizes = [len(c) for c in comps]
    params = check_params(params, max(sizes), len(comps), enforce=enforce_bounds)

    total = sum(sizes)
    grouping = np.zeros((len(comps), total))
    offsets = np.cumsum([0] + sizes)
    for r, (start, stop) in enumerate(zip(offsets[:-1], offsets[1:])):
        grouping[r, start:stop] = 1.0
    outer = logistic_layer(grouping, [-(m - 0.5) for m in sizes], k=params.lam)

    if head_scale is None:
        head = identity_layer(np.ones((1, len(comps))), [0.0])
        tau = head_tau
    else:
        if head_scale <= 0:
            raise InvalidInputError(f"head scale must be positive, got {head_scale}")
        head = identity_layer(np.full((1, len(comps)), float(head_scale)), [-head_scale * head_tau])
        tau = 0.0

    provenance = {"kind": "union", "params": params.to_dict(), "head_scale": head_scale, "head_tau": head_tau,
                  "components": [c.to_dict() for c in comps]}
    log.info("compiled union: %d components, %d gates, lambda=%g", len(comps), total, params.lam)
    return NetworkSpec((_gate_layer(comps, params.kappa), outer, head), tau=tau, provenance=provenance)


def compile_ball_cover(cover: BallCover, eps_poly: float, params: Optional[GateParams] = None,
                       sides: Optional[int] = None, head_scale: Optional[float] = None, head_tau: float = 0.5,
                       enforce_bounds: bool = True, seed: int = 0) -> NetworkSpec:
    """
    Replaces every ball by its circumscribed polytope and compiles the union.
    Facet counts come from `facet_count_for_tolerance(r_j, eps_poly, d)` unless `sides` fixes them.
    Without params, margin_params defaults are used; an unset kappa becomes sharpness_for(eps_poly, eta).
    """
    if eps_poly <= 0:
        raise InvalidInputError(f"eps_poly must be positive, got {eps_poly}")
    if sides is not None and sides < cover.dim + 1:
        raise InvalidInputError(f"{sides} sides cannot bound a polytope in dimension {cover.dim}")

    counts: List[int] = [sides if sides is not None else facet_count_for_tolerance(float(r), eps_poly, cover.dim)
                         for r in cover.radii]
    comps = [ball_polytope(c, float(r), m, cover.dim, seed=seed)
             for c, r, m in zip(cover.centers, cover.radii, counts)]

    if params is None:
        params = margin_params(max(counts), len(comps))
    if params.kappa is None:
        params = params.with_kappa(sharpness_for(eps_poly, params.eta))

    spec = compile_union(comps, params, head_scale=head_scale, head_tau=head_tau, enforce_bounds=enforce_bounds)
    provenance = dict(spec.provenance)
    provenance.update({"kind": "cover", "eps_poly": float(eps_poly),
                       "balls": [{"c": c.tolist(), "r": float(r), "m": m}
                                 for c, r, m in zip(cover.centers, cover.radii, counts)]})
    return NetworkSpec(spec.layers, tau=spec.tau, provenance=provenance)
