from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from apedit.numcore.tensor import Parameter, Tape, Tensor, get_dtype, no_tape

__all__ = ("GradCheckReport", "grad_check", "relative_error")

DEFAULT_EPS = 1e-5
DEFAULT_MAX_ENTRIES = 200
# Denominator floor of the relative error
MIN_SCALE = 1e-8


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), MIN_SCALE)


@dataclass
class GradCheckReport:
    max_error: float = 0.0
    per_param: dict[str, float] = field(default_factory=dict)
    checked_entries: int = 0

    def passed(self, tolerance: float = 1e-4) -> bool:
        return self.max_error < tolerance

    def worst(self, n: int = 5) -> list[tuple[str, float]]:
        return sorted(self.per_param.items(), key=lambda x: -x[1])[:n]


def grad_check(
    loss_fn: Callable[[], Tensor],
    params: Sequence[Parameter],
    *,
    eps: float = DEFAULT_EPS,
    max_entries: int = DEFAULT_MAX_ENTRIES,
    seed: int = 0,
) -> GradCheckReport:
    """
    Compare tape gradients with central finite differences.
    `loss_fn` must be deterministic (eval mode, no dropout). Parameters with more than `max_entries`
    entries are checked on a random sample of that many entries.
    """
    if get_dtype() is not np.float64 or any(p.value.dtype != np.float64 for p in params):
        raise ValueError("Gradient checks need 64-bit tensors, run them inside `float64_mode()`")

    for param in params:
        param.zero_grad()
    with Tape() as tape:
        loss = loss_fn()
    tape.backward(loss)
    analytic = {p.name: p.grad.copy() for p in params}

    rng = np.random.default_rng(seed)
    report = GradCheckReport()
    for param in params:
        flat = param.value.reshape(-1)
        if flat.size <= max_entries:
            indices = np.arange(flat.size)
        else:
            indices = np.sort(rng.choice(flat.size, size=max_entries, replace=False))
        worst = 0.0
        for idx in indices:
            original = flat[idx]
            with no_tape():
                flat[idx] = original + eps
                plus = loss_fn().item()
                flat[idx] = original - eps
                minus = loss_fn().item()
            flat[idx] = original
            numeric = (plus - minus) / (2 * eps)
            worst = max(worst, relative_error(float(analytic[param.name].reshape(-1)[idx]), numeric))
        report.per_param[param.name] = worst
        report.max_error = max(report.max_error, worst)
        report.checked_entries += len(indices)
        param.zero_grad()
    return report
