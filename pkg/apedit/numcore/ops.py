"""
Differentiable operations.

Every op computes its output with numpy, checks it is finite, and, when a tape is active and an
input requires gradients, records a closure returning the gradient of each input.
"""

from collections.abc import Sequence

import numpy as np

from apedit.errors import NumericalError, ShapeMismatch
from apedit.numcore.tensor import BackwardFn, Tensor, TapeEntry, active_tape

__all__ = (
    "constant",
    "add",
    "add_n",
    "sub",
    "mul",
    "scale",
    "matmul",
    "linear",
    "concat",
    "slice_last",
    "stack",
    "reshape",
    "gather_rows",
    "tanh",
    "sigmoid",
    "embedding_lookup",
    "dropout",
    "maxout",
    "softmax",
    "log_softmax",
    "cross_entropy",
    "sum_all",
)


def _finish(op: str, value: np.ndarray, inputs: tuple[Tensor, ...], backward: BackwardFn) -> Tensor:
    if not np.all(np.isfinite(value)):
        raise NumericalError(f"Non-finite values produced by {op!r}")
    requires_grad = any(t.requires_grad for t in inputs)
    out = Tensor(value, requires_grad=requires_grad, dtype=value.dtype.type)
    if requires_grad and (tape := active_tape()) is not None:
        tape.record(TapeEntry(op, inputs, out, backward))
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `grad` over the axes numpy broadcast to reach it from `shape`."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, *shapes: tuple[int, ...]) -> tuple[int, ...]:
    try:
        return np.broadcast_shapes(*shapes)
    except ValueError as e:
        raise ShapeMismatch(f"{op}: cannot broadcast shapes {shapes}") from e


def constant(value) -> Tensor:
    """A tensor that never receives gradients (masks, fixed inputs)."""
    return Tensor(value, requires_grad=False)


def add(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape("add", a.shape, b.shape)
    return _finish(
        "add",
        a.value + b.value,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def add_n(tensors: Sequence[Tensor]) -> Tensor:
    if not tensors:
        raise ShapeMismatch("add_n: no tensors to add")
    shapes = {t.shape for t in tensors}
    if len(shapes) != 1:
        raise ShapeMismatch(f"add_n: tensors have different shapes {shapes}")
    value = tensors[0].value.copy()
    for t in tensors[1:]:
        value = value + t.value
    return _finish("add_n", value, tuple(tensors), lambda g: [g] * len(tensors))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape("sub", a.shape, b.shape)
    return _finish(
        "sub",
        a.value - b.value,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
    )


def mul(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape("mul", a.shape, b.shape)
    return _finish(
        "mul",
        a.value * b.value,
        (a, b),
        lambda g: (_unbroadcast(g * b.value, a.shape), _unbroadcast(g * a.value, b.shape)),
    )


def scale(a: Tensor, factor: float) -> Tensor:
    return _finish("scale", a.value * factor, (a,), lambda g: (g * factor,))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """numpy `@` on operands of rank >= 2 (batched when rank 3)."""
    if a.value.ndim < 2 or b.value.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeMismatch(f"matmul: incompatible shapes {a.shape} @ {b.shape}")

    def _backward(g: np.ndarray):
        ga = g @ np.swapaxes(b.value, -1, -2)
        gb = np.swapaxes(a.value, -1, -2) @ g
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return _finish("matmul", a.value @ b.value, (a, b), _backward)


def linear(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """x @ W (+ b), row-vector convention."""
    out = matmul(x, weight)
    return out if bias is None else add(out, bias)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    values = [t.value for t in tensors]
    try:
        value = np.concatenate(values, axis=axis)
    except ValueError as e:
        raise ShapeMismatch(f"concat: {[t.shape for t in tensors]} along axis {axis}") from e
    splits = np.cumsum([v.shape[axis] for v in values])[:-1]
    return _finish("concat", value, tuple(tensors), lambda g: np.split(g, splits, axis=axis))


def slice_last(a: Tensor, start: int, stop: int) -> Tensor:
    """a[..., start:stop]"""
    if not 0 <= start < stop <= a.shape[-1]:
        raise ShapeMismatch(f"slice_last: [{start}:{stop}] out of range for shape {a.shape}")

    def _backward(g: np.ndarray):
        ga = np.zeros_like(a.value)
        ga[..., start:stop] = g
        return (ga,)

    return _finish("slice", a.value[..., start:stop], (a,), _backward)


def stack(tensors: Sequence[Tensor], axis: int = 1) -> Tensor:
    try:
        value = np.stack([t.value for t in tensors], axis=axis)
    except ValueError as e:
        raise ShapeMismatch(f"stack: {[t.shape for t in tensors]}") from e
    return _finish(
        "stack",
        value,
        tuple(tensors),
        lambda g: [np.take(g, i, axis=axis) for i in range(len(tensors))],
    )


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    try:
        value = a.value.reshape(shape)
    except ValueError as e:
        raise ShapeMismatch(f"reshape: {a.shape} -> {shape}") from e
    return _finish("reshape", value, (a,), lambda g: (g.reshape(a.shape),))


def gather_rows(a: Tensor, index: np.ndarray) -> Tensor:
    """Pick one row per batch element: a (B, A, D), index (B,) -> (B, D)."""
    if a.value.ndim != 3 or index.shape != (a.shape[0],):
        raise ShapeMismatch(f"gather_rows: states {a.shape} with index {index.shape}")
    if np.any(index < 0) or np.any(index >= a.shape[1]):
        raise ShapeMismatch(f"gather_rows: index out of range [0, {a.shape[1]})")
    batch = np.arange(a.shape[0])

    def _backward(g: np.ndarray):
        ga = np.zeros_like(a.value)
        ga[batch, index] = g
        return (ga,)

    return _finish("gather_rows", a.value[batch, index], (a,), _backward)


def tanh(a: Tensor) -> Tensor:
    value = np.tanh(a.value)
    return _finish("tanh", value, (a,), lambda g: (g * (1 - value * value),))


def sigmoid(a: Tensor) -> Tensor:
    value = 0.5 * (1 + np.tanh(0.5 * a.value))
    return _finish("sigmoid", value, (a,), lambda g: (g * value * (1 - value),))


def embedding_lookup(table: Tensor, ids: np.ndarray) -> Tensor:
    """table (V, E), integer ids of any shape -> ids.shape + (E,)"""
    if table.value.ndim != 2:
        raise ShapeMismatch(f"embedding_lookup: table must be 2D, got {table.shape}")
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise ShapeMismatch(f"embedding_lookup: ids out of range [0, {table.shape[0]})")

    def _backward(g: np.ndarray):
        gt = np.zeros_like(table.value)
        np.add.at(gt, ids, g)
        return (gt,)

    return _finish("embedding", table.value[ids], (table,), _backward)


def dropout(a: Tensor, p: float, rng: np.random.Generator | None, train: bool) -> Tensor:
    """Inverted dropout: surviving units are scaled by 1/(1-p) at train time."""
    if not 0 <= p < 1:
        raise ValueError(f"Dropout probability must be in [0, 1), got {p}")
    if not train or p == 0:
        return a
    if rng is None:
        raise ValueError("Dropout at train time needs a random generator")
    mask = (rng.random(a.shape) >= p).astype(a.value.dtype) / (1 - p)
    return _finish("dropout", a.value * mask, (a,), lambda g: (g * mask,))


def maxout(a: Tensor, pieces: int) -> Tensor:
    """Max over consecutive groups of `pieces` units: width W -> W / pieces."""
    width = a.shape[-1]
    if pieces < 1 or width % pieces:
        raise ShapeMismatch(f"maxout: width {width} is not divisible by {pieces} pieces")
    grouped = a.value.reshape(*a.shape[:-1], width // pieces, pieces)
    winner = grouped.argmax(axis=-1)
    value = np.take_along_axis(grouped, winner[..., None], axis=-1)[..., 0]

    def _backward(g: np.ndarray):
        ga = np.zeros_like(grouped)
        np.put_along_axis(ga, winner[..., None], g[..., None], axis=-1)
        return (ga.reshape(a.shape),)

    return _finish("maxout", value, (a,), _backward)


def _softmax(x: np.ndarray) -> np.ndarray:
    shifted = np.exp(x - x.max(axis=-1, keepdims=True))
    return shifted / shifted.sum(axis=-1, keepdims=True)


def softmax(a: Tensor) -> Tensor:
    value = _softmax(a.value)
    return _finish(
        "softmax",
        value,
        (a,),
        lambda g: (value * (g - (g * value).sum(axis=-1, keepdims=True)),),
    )


def log_softmax(a: Tensor) -> Tensor:
    shifted = a.value - a.value.max(axis=-1, keepdims=True)
    value = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    return _finish(
        "log_softmax",
        value,
        (a,),
        lambda g: (g - np.exp(value) * g.sum(axis=-1, keepdims=True),),
    )


def cross_entropy(log_probs: Tensor, targets: np.ndarray, ignore_index: int | None = None, reduction: str = "mean"):
    """
    Negative log-likelihood of integer `targets` (B,) under `log_probs` (B, V).
    Positions equal to `ignore_index` contribute neither loss nor gradient.
    `reduction` is "mean" (over counted positions) or "sum".
    """
    if log_probs.value.ndim != 2 or targets.shape != (log_probs.shape[0],):
        raise ShapeMismatch(f"cross_entropy: log-probs {log_probs.shape} with targets {targets.shape}")
    keep = np.ones(targets.shape, dtype=bool) if ignore_index is None else targets != ignore_index
    rows = np.arange(targets.shape[0])[keep]
    cols = targets[keep]
    count = len(rows)
    norm = 1.0 / count if reduction == "mean" and count else 1.0
    value = np.asarray(-log_probs.value[rows, cols].sum() * norm, dtype=log_probs.value.dtype)

    def _backward(g: np.ndarray):
        gl = np.zeros_like(log_probs.value)
        gl[rows, cols] = -g * norm
        return (gl,)

    return _finish("cross_entropy", value, (log_probs,), _backward)


def sum_all(a: Tensor) -> Tensor:
    return _finish(
        "sum",
        np.asarray(a.value.sum(), dtype=a.value.dtype),
        (a,),
        lambda g: (np.broadcast_to(g, a.shape).copy(),),
    )
