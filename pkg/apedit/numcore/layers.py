from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from apedit.errors import ShapeMismatch
from apedit.numcore import ops
from apedit.numcore.tensor import Parameter, Tensor, get_dtype

__all__ = ("ParameterStore", "Linear", "LSTMParams", "lstm_step")

FORGET_BIAS = 1.0


class ParameterStore:
    """
    Owns every Parameter of a model, keyed by a unique name.
    Matrices are drawn from uniform(-init_scale, init_scale), biases start at zero.
    """

    def __init__(self, rng: np.random.Generator, init_scale: float = 0.1):
        self.rng = rng
        self.init_scale = init_scale
        self._params: dict[str, Parameter] = {}

    def add(self, param: Parameter) -> Parameter:
        if param.name in self._params:
            raise ValueError(f"Parameter {param.name!r} is already registered")
        self._params[param.name] = param
        return param

    def uniform(self, name: str, shape: tuple[int, ...]) -> Parameter:
        value = self.rng.uniform(-self.init_scale, self.init_scale, size=shape)
        return self.add(Parameter(name, value.astype(get_dtype())))

    def zeros(self, name: str, shape: tuple[int, ...]) -> Parameter:
        return self.add(Parameter(name, np.zeros(shape, dtype=get_dtype())))

    def __getitem__(self, name: str) -> Parameter:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __iter__(self) -> Iterator[Parameter]:
        return iter(self._params.values())

    def __len__(self) -> int:
        return len(self._params)

    @property
    def names(self) -> list[str]:
        return list(self._params)

    def zero_grad(self):
        for param in self._params.values():
            param.zero_grad()


@dataclass
class Linear:
    weight: Parameter
    bias: Parameter | None

    @classmethod
    def create(cls, store: ParameterStore, name: str, in_size: int, out_size: int, bias: bool = True) -> "Linear":
        return cls(
            weight=store.uniform(f"{name}.weight", (in_size, out_size)),
            bias=store.zeros(f"{name}.bias", (out_size,)) if bias else None,
        )

    @property
    def out_size(self) -> int:
        return self.weight.shape[1]

    def __call__(self, x: Tensor) -> Tensor:
        return ops.linear(x, self.weight, self.bias)


@dataclass
class LSTMParams:
    """Fused gate weights over concat(x, h), gates ordered input, forget, output, candidate."""

    weight: Parameter
    bias: Parameter

    @classmethod
    def create(cls, store: ParameterStore, name: str, input_size: int, hidden_size: int) -> "LSTMParams":
        weight = store.uniform(f"{name}.weight", (input_size + hidden_size, 4 * hidden_size))
        bias = store.zeros(f"{name}.bias", (4 * hidden_size,))
        bias.value[hidden_size : 2 * hidden_size] = FORGET_BIAS
        return cls(weight=weight, bias=bias)

    @property
    def hidden_size(self) -> int:
        return self.bias.shape[0] // 4

    @property
    def input_size(self) -> int:
        return self.weight.shape[0] - self.hidden_size


def lstm_step(x: Tensor, h: Tensor, c: Tensor, params: LSTMParams) -> tuple[Tensor, Tensor]:
    """One LSTM step on a batch: x (B, I), h and c (B, H) -> (h_t, c_t)."""
    size = params.hidden_size
    if x.shape[0] != h.shape[0] or h.shape != c.shape:
        raise ShapeMismatch(f"lstm_step: batch mismatch between x {x.shape}, h {h.shape} and c {c.shape}")
    if x.shape[-1] != params.input_size or h.shape[-1] != size:
        raise ShapeMismatch(
            f"lstm_step: expected input width {params.input_size} and hidden width {size}, "
            f"got {x.shape[-1]} and {h.shape[-1]}"
        )
    gates = ops.linear(ops.concat([x, h]), params.weight, params.bias)
    input_gate = ops.sigmoid(ops.slice_last(gates, 0, size))
    forget_gate = ops.sigmoid(ops.slice_last(gates, size, 2 * size))
    output_gate = ops.sigmoid(ops.slice_last(gates, 2 * size, 3 * size))
    candidate = ops.tanh(ops.slice_last(gates, 3 * size, 4 * size))
    c_t = ops.add(ops.mul(forget_gate, c), ops.mul(input_gate, candidate))
    h_t = ops.mul(output_gate, ops.tanh(c_t))
    return h_t, c_t
