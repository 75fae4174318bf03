import contextlib
from collections.abc import Callable, Generator, Sequence
from contextvars import ContextVar
from dataclasses import dataclass

import numpy as np

from apedit.errors import NotScalar

__all__ = (
    "Tensor",
    "Parameter",
    "Tape",
    "TapeEntry",
    "get_dtype",
    "float64_mode",
    "active_tape",
    "no_tape",
)

_dtype: ContextVar[type[np.floating]] = ContextVar("apedit_dtype", default=np.float32)
_active_tape: ContextVar["Tape | None"] = ContextVar("apedit_tape", default=None)


def get_dtype() -> type[np.floating]:
    return _dtype.get()


@contextlib.contextmanager
def float64_mode() -> Generator[None, None, None]:
    """Create tensors in 64-bit precision (gradient checks, reproducibility runs)."""
    token = _dtype.set(np.float64)
    try:
        yield
    finally:
        _dtype.reset(token)


def active_tape() -> "Tape | None":
    return _active_tape.get()


@contextlib.contextmanager
def no_tape() -> Generator[None, None, None]:
    """Run operations without recording them (inference, finite differences)."""
    token = _active_tape.set(None)
    try:
        yield
    finally:
        _active_tape.reset(token)


class Tensor:
    """Dense row-major float array."""

    __slots__ = ("value", "requires_grad")

    def __init__(self, value, requires_grad: bool = False, dtype: type[np.floating] | None = None):
        self.value: np.ndarray = np.asarray(value, dtype=dtype or get_dtype())
        self.requires_grad = requires_grad

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def item(self) -> float:
        return float(self.value)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, dtype={self.value.dtype})"


class Parameter(Tensor):
    """A named trainable tensor with its accumulated gradient."""

    __slots__ = ("name", "grad")

    def __init__(self, name: str, value, dtype: type[np.floating] | None = None):
        super().__init__(value, requires_grad=True, dtype=dtype)
        self.name = name
        self.grad: np.ndarray = np.zeros_like(self.value)

    def zero_grad(self):
        self.grad.fill(0)

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.shape})"


type BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]


@dataclass(slots=True)
class TapeEntry:
    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn


class Tape:
    """
    Ordered record of differentiable operations.
    Operations are recorded while the tape is active (`with Tape() as tape: ...`) and
    `backward` walks them in exact reverse order of recording.
    """

    def __init__(self):
        self.entries: list[TapeEntry] = []
        self._tokens = []

    def __enter__(self) -> "Tape":
        self._tokens.append(_active_tape.set(self))
        return self

    def __exit__(self, *exc):
        _active_tape.reset(self._tokens.pop())

    def __len__(self) -> int:
        return len(self.entries)

    def record(self, entry: TapeEntry):
        self.entries.append(entry)

    def backward(self, loss: Tensor):
        """
        Accumulate dLoss/dParam into every reachable Parameter's `grad`.
        Gradients of intermediate tensors live only for the duration of the call, so calling
        backward twice on the same tape doubles the parameter gradients.
        """
        if loss.value.size != 1:
            raise NotScalar(f"Loss must be a scalar, got shape {loss.shape}")
        grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.value)}
        if isinstance(loss, Parameter):
            loss.grad += grads[id(loss)]
            return
        for entry in reversed(self.entries):
            grad = grads.pop(id(entry.output), None)
            if grad is None:
                continue
            for tensor, input_grad in zip(entry.inputs, entry.backward(grad)):
                if input_grad is None or not tensor.requires_grad:
                    continue
                if isinstance(tensor, Parameter):
                    tensor.grad += input_grad
                elif (_prev := grads.get(id(tensor))) is not None:
                    grads[id(tensor)] = _prev + input_grad
                else:
                    grads[id(tensor)] = input_grad
