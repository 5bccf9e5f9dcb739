import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import InvalidInputError

FORMAT_VERSION = 1
LOGISTIC = "logistic"
IDENTITY = "identity"


@dataclass(frozen=True, eq=False)
class Layer:
    """
    Affine map followed by an activation: act(k * (W x + b)).
    Identity layers ignore k.
    """
    weight: np.ndarray
    bias: np.ndarray
    activation: str = LOGISTIC
    k: float = 1.0

    def __post_init__(self):
        weight = np.atleast_2d(np.array(self.weight, dtype=np.float64))
        bias = np.array(self.bias, dtype=np.float64).ravel()
        if weight.ndim != 2 or weight.shape[0] != len(bias):
            raise InvalidInputError(f"layer weight {weight.shape} does not match bias of length {len(bias)}")
        if self.activation not in (LOGISTIC, IDENTITY):
            raise InvalidInputError(f"unknown activation {self.activation!r}")
        if self.activation == LOGISTIC and not self.k > 0:
            raise InvalidInputError(f"logistic sharpness k must be positive, got {self.k}")
        if not (np.all(np.isfinite(weight)) and np.all(np.isfinite(bias))):
            raise InvalidInputError("layer parameters must be finite")
        weight.flags.writeable = False
        bias.flags.writeable = False
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "bias", bias)
        object.__setattr__(self, "k", float(self.k))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.weight.shape

    def to_dict(self) -> dict:
        data = {"w": self.weight.tolist(), "b": self.bias.tolist(), "act": self.activation}
        if self.activation == LOGISTIC:
            data["k"] = self.k
        return data

    @staticmethod
    def from_dict(data: dict) -> "Layer":
        return Layer(weight=np.asarray(data["w"], dtype=np.float64),
                     bias=np.asarray(data["b"], dtype=np.float64),
                     activation=data.get("act", LOGISTIC),
                     k=float(data.get("k", 1.0)))


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    """
    Layered sigmoidal network in finite-sum form.
    The last layer has a single output; the reported logit is that output minus the head threshold `tau`.
    `provenance` carries the geometric description the weights were compiled from, if any.
    """
    layers: Tuple[Layer, ...]
    tau: float = 0.0
    provenance: Optional[Dict[str, Any]] = field(default=None)

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise InvalidInputError("a network needs at least one layer")
        for i, (prev, nxt) in enumerate(zip(layers[:-1], layers[1:])):
            if nxt.shape[1] != prev.shape[0]:
                raise InvalidInputError(f"layer {i + 1} expects {nxt.shape[1]} inputs but layer {i} "
                                        f"produces {prev.shape[0]}")
        if layers[-1].shape[0] != 1:
            raise InvalidInputError(f"the last layer must have one output, got {layers[-1].shape[0]}")
        if not np.isfinite(self.tau):
            raise InvalidInputError(f"head threshold must be finite, got {self.tau}")
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "tau", float(self.tau))

    @property
    def input_dim(self) -> int:
        return self.layers[0].shape[1]

    @property
    def widths(self) -> List[int]:
        return [self.input_dim] + [layer.shape[0] for layer in self.layers]

    @property
    def hidden_units(self) -> List[int]:
        """Unit counts of every layer but the output one."""
        return [layer.shape[0] for layer in self.layers[:-1]]

    @property
    def parameter_count(self) -> int:
        return sum(layer.weight.size + layer.bias.size for layer in self.layers)

    def to_dict(self) -> dict:
        data = {"format_version": FORMAT_VERSION,
                "layers": [layer.to_dict() for layer in self.layers],
                "head": {"tau": self.tau}}
        if self.provenance is not None:
            data["provenance"] = self.provenance
        return data

    @staticmethod
    def from_dict(data: dict) -> "NetworkSpec":
        version = data.get("format_version", FORMAT_VERSION)
        if version != FORMAT_VERSION:
            raise InvalidInputError(f"unsupported network format_version {version}")
        try:
            layers = [Layer.from_dict(layer) for layer in data["layers"]]
            tau = float(data.get("head", {}).get("tau", 0.0))
        except (KeyError, TypeError) as e:
            raise InvalidInputError(f"malformed network spec: {e}") from e
        return NetworkSpec(tuple(layers), tau=tau, provenance=data.get("provenance"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @staticmethod
    def from_json(text: str) -> "NetworkSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise InvalidInputError(f"network spec is not valid JSON: {e}") from e
        return NetworkSpec.from_dict(data)

    def save(self, path: str) -> None:
        with open(path, "w") as f:
            f.write(self.to_json())

    @staticmethod
    def load(path: str) -> "NetworkSpec":
        with open(path) as f:
            return NetworkSpec.from_json(f.read())


def logistic_layer(weight: Sequence, bias: Sequence, k: float = 1.0) -> Layer:
    return Layer(np.asarray(weight, dtype=np.float64), np.asarray(bias, dtype=np.float64), LOGISTIC, k)


def identity_layer(weight: Sequence, bias: Sequence) -> Layer:
    return Layer(np.asarray(weight, dtype=np.float64), np.asarray(bias, dtype=np.float64), IDENTITY)
