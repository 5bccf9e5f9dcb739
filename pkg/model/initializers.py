import math
from typing import Callable, Dict, Sequence

import torch
from torch import nn

from errors import InvalidInputError
from model.network_spec import NetworkSpec, identity_layer, logistic_layer

RANDOM_BOUND = 0.5


def _random(w: torch.Tensor, generator: torch.Generator) -> torch.Tensor:
    return w.uniform_(-RANDOM_BOUND, RANDOM_BOUND, generator=generator)


def _xavier(w: torch.Tensor, generator: torch.Generator) -> torch.Tensor:
    return nn.init.xavier_uniform_(w, generator=generator)


def _kaiming(w: torch.Tensor, generator: torch.Generator) -> torch.Tensor:
    # gain sqrt(2) with fan_in mode gives the bound sqrt(6 / fan_in)
    return nn.init.kaiming_uniform_(w, mode="fan_in", nonlinearity="relu", generator=generator)


def _he(w: torch.Tensor, generator: torch.Generator) -> torch.Tensor:
    return nn.init.kaiming_normal_(w, mode="fan_in", nonlinearity="relu", generator=generator)


SCHEMES: Dict[str, Callable[[torch.Tensor, torch.Generator], torch.Tensor]] = {
    "random": _random,
    "xavier": _xavier,
    "kaiming": _kaiming,
    "he": _he,
}


def weight_bound(scheme: str, fan_in: int, fan_out: int) -> float:
    """Half-width of the uniform schemes, or the standard deviation of the normal one."""
    if scheme == "random":
        return RANDOM_BOUND
    if scheme == "xavier":
        return math.sqrt(6.0 / (fan_in + fan_out))
    if scheme == "kaiming":
        return math.sqrt(6.0 / fan_in)
    if scheme == "he":
        return math.sqrt(2.0 / fan_in)
    raise InvalidInputError(f"unknown init scheme {scheme!r}, expected one of {sorted(SCHEMES)}")


def init_baseline(scheme: str, widths: Sequence[int], seed: int) -> NetworkSpec:
    """
    Baseline network input -> hidden... -> 1 with logistic hidden layers, an identity output and zero biases.
    Weights are drawn layer by layer from a generator seeded with `seed`, so the same seed gives the same spec.
    """
    if scheme not in SCHEMES:
        raise InvalidInputError(f"unknown init scheme {scheme!r}, expected one of {sorted(SCHEMES)}")
    widths = [int(w) for w in widths]
    if len(widths) < 2 or any(w < 1 for w in widths):
        raise InvalidInputError(f"widths must list at least input and output sizes, got {widths}")
    if widths[-1] != 1:
        raise InvalidInputError(f"the output width must be 1, got {widths[-1]}")

    generator = torch.Generator().manual_seed(int(seed))
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
        # torch weights are (fan_out, fan_in), the same layout as Layer.weight
        w = SCHEMES[scheme](torch.empty(fan_out, fan_in, dtype=torch.float64), generator).numpy()
        b = [0.0] * fan_out
        is_output = i == len(widths) - 2
        layers.append(identity_layer(w, b) if is_output else logistic_layer(w, b))
    return NetworkSpec(tuple(layers), tau=0.0, provenance={"kind": "baseline", "scheme": scheme, "seed": int(seed)})
