from collections.abc import Iterable

import numpy as np

from apedit.numcore.tensor import Parameter

__all__ = ("sgd_step", "grad_norm")


def grad_norm(params: Iterable[Parameter]) -> float:
    return float(np.sqrt(sum(float(np.sum(p.grad.astype(np.float64) ** 2)) for p in params)))


def sgd_step(params: Iterable[Parameter], lr: float, clip_norm: float | None = None) -> float:
    """
    Plain SGD: p <- p - lr * grad, then reset every gradient to zero.
    With `clip_norm`, gradients are rescaled so their global L2 norm does not exceed it.
    Returns the global gradient norm before clipping.
    """
    if lr < 0:
        raise ValueError(f"Learning rate must be >= 0, got {lr}")
    _params = list(params)
    norm = grad_norm(_params)
    factor = 1.0
    if clip_norm is not None and norm > clip_norm > 0:
        factor = clip_norm / norm
    for param in _params:
        if lr:
            param.value -= (lr * factor) * param.grad
        param.zero_grad()
    return norm
