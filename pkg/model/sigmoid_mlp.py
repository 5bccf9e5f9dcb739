from typing import List, Tuple, Union

import numpy as np
import torch
from torch import nn

from errors import DimensionMismatchError, EmptySetError
from model.network_spec import IDENTITY, Layer, NetworkSpec

# sigma(37) already rounds to 1.0 in double precision
LOGIT_CLAMP = 37.0
BCE_CLIP = 1e-7


class SigmoidMLP(nn.Module):
    """
    Trainable float64 view of a NetworkSpec.
    forward returns the logit (last output minus the head threshold); activation types and
    sharpness constants are fixed, weights and biases are parameters.
    """
    def __init__(self, spec: NetworkSpec):
        super().__init__()
        self.weights = nn.ParameterList([nn.Parameter(torch.tensor(l.weight, dtype=torch.float64))
                                         for l in spec.layers])
        self.biases = nn.ParameterList([nn.Parameter(torch.tensor(l.bias, dtype=torch.float64))
                                        for l in spec.layers])
        self.activations = [l.activation for l in spec.layers]
        self.register_buffer("sharpness", torch.tensor([l.k for l in spec.layers], dtype=torch.float64))
        self.tau = spec.tau
        self.input_dim = spec.input_dim
        self.provenance = spec.provenance

    def scores(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] != self.input_dim:
            raise DimensionMismatchError(self.input_dim, x.shape[-1], "input")
        h = x
        for i, (w, b, act) in enumerate(zip(self.weights, self.biases, self.activations)):
            h = h @ w.T + b
            if act != IDENTITY:
                h = torch.sigmoid(self.sharpness[i] * h)
        return h.squeeze(-1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.scores(x) - self.tau

    def predict_proba(self, x: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(torch.clamp(self(x), -LOGIT_CLAMP, LOGIT_CLAMP))

    def to_spec(self) -> NetworkSpec:
        layers = tuple(Layer(w.detach().cpu().numpy().copy(), b.detach().cpu().numpy().copy(), act,
                             float(self.sharpness[i]))
                       for i, (w, b, act) in enumerate(zip(self.weights, self.biases, self.activations)))
        return NetworkSpec(layers, tau=self.tau, provenance=self.provenance)


def _as_batch(spec: NetworkSpec, x) -> Tuple[torch.Tensor, bool]:
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != spec.input_dim:
        raise DimensionMismatchError(spec.input_dim, arr.shape[1], "input")
    return torch.tensor(arr), single


def forward(spec: NetworkSpec, x) -> Tuple[Union[float, np.ndarray], Union[float, np.ndarray]]:
    """
    Evaluates (logit, prob) at one point (1-D input) or a batch (N x d input).
    For compiled counting heads the logit is score - tau.
    """
    batch, single = _as_batch(spec, x)
    model = SigmoidMLP(spec)
    with torch.no_grad():
        logits = model(batch)
        probs = torch.sigmoid(torch.clamp(logits, -LOGIT_CLAMP, LOGIT_CLAMP))
    logits, probs = logits.numpy(), probs.numpy()
    if single:
        return float(logits[0]), float(probs[0])
    return logits, probs


def predict_proba(spec: NetworkSpec, x, batch_size: int = 65536) -> np.ndarray:
    batch, _ = _as_batch(spec, x)
    model = SigmoidMLP(spec)
    out: List[torch.Tensor] = []
    with torch.no_grad():
        for chunk in torch.split(batch, batch_size):
            out.append(model.predict_proba(chunk))
    return torch.cat(out).numpy()


def scores(spec: NetworkSpec, x) -> np.ndarray:
    """Raw last-layer output, i.e. the value the head compares against tau."""
    batch, _ = _as_batch(spec, x)
    with torch.no_grad():
        return SigmoidMLP(spec).scores(batch).numpy()


def as_trainable(spec: NetworkSpec) -> NetworkSpec:
    """Folds the head threshold into the bias of the final identity layer so every parameter can be trained."""
    if spec.tau == 0.0:
        return spec
    last = spec.layers[-1]
    if last.activation != IDENTITY:
        # a logistic output unit is followed by an explicit unit-weight affine head
        head = Layer(np.ones((1, 1)), np.array([-spec.tau]), IDENTITY)
        return NetworkSpec(spec.layers + (head,), tau=0.0, provenance=spec.provenance)
    folded = Layer(last.weight, last.bias - spec.tau, IDENTITY)
    return NetworkSpec(spec.layers[:-1] + (folded,), tau=0.0, provenance=spec.provenance)


def bce_loss(probs, labels) -> torch.Tensor:
    """Mean binary cross-entropy with probabilities clipped to [1e-7, 1 - 1e-7]."""
    probs = torch.as_tensor(probs, dtype=torch.float64)
    labels = torch.as_tensor(labels, dtype=torch.float64)
    if probs.numel() == 0:
        raise EmptySetError("bce_loss of an empty batch")
    if probs.shape != labels.shape:
        raise DimensionMismatchError(probs.numel(), labels.numel(), "labels")
    p = torch.clamp(probs, BCE_CLIP, 1.0 - BCE_CLIP)
    return -torch.mean(labels * torch.log(p) + (1.0 - labels) * torch.log1p(-p))


def gradient_check(spec: NetworkSpec, x, y, h: float = 1e-5) -> float:
    """
    Normwise relative error between the autograd gradient of the BCE loss and central
    finite differences with step h, over all parameters of the network.
    """
    batch, _ = _as_batch(spec, x)
    labels = torch.as_tensor(np.asarray(y, dtype=np.float64))
    model = SigmoidMLP(spec)

    loss = bce_loss(model.predict_proba(batch), labels)
    analytic = torch.cat([g.ravel() for g in torch.autograd.grad(loss, list(model.parameters()))])

    numeric = []
    with torch.no_grad():
        for p in model.parameters():
            flat = p.view(-1)
            for i in range(flat.numel()):
                orig = flat[i].item()
                flat[i] = orig + h
                up = bce_loss(model.predict_proba(batch), labels).item()
                flat[i] = orig - h
                down = bce_loss(model.predict_proba(batch), labels).item()
                flat[i] = orig
                numeric.append((up - down) / (2 * h))
    numeric = torch.tensor(numeric, dtype=torch.float64)
    denom = max(analytic.norm().item(), numeric.norm().item(), 1e-12)
    return (analytic - numeric).norm().item() / denom
