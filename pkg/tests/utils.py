import itertools
import math
from collections.abc import Sequence

import numpy as np

__all__ = ("levenshtein", "indel_distance", "all_sentences", "lstm_step_scalar", "softmax_ref")


def levenshtein(hyp: Sequence[str], ref: Sequence[str]) -> int:
    """Plain insertion/deletion/substitution distance."""
    prev = list(range(len(ref) + 1))
    for i, h in enumerate(hyp, start=1):
        cur = [i]
        for j, r in enumerate(ref, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (h != r)))
        prev = cur
    return prev[-1]


def indel_distance(a: Sequence[str], b: Sequence[str]) -> int:
    """Edit distance with insertions and deletions only: |a| + |b| - 2 LCS(a, b)."""
    lcs = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            lcs[i + 1][j + 1] = lcs[i][j] + 1 if x == y else max(lcs[i][j + 1], lcs[i + 1][j])
    return len(a) + len(b) - 2 * lcs[-1][-1]


def all_sentences(alphabet: Sequence[str], max_len: int) -> list[list[str]]:
    return [list(s) for n in range(max_len + 1) for s in itertools.product(alphabet, repeat=n)]


def _sigmoid(x: float) -> float:
    return 1 / (1 + math.exp(-x))


def lstm_step_scalar(x, h, c, weight, bias) -> tuple[list[float], list[float]]:
    """Unit by unit LSTM step on a single example, gates ordered i, f, o, g."""
    xh = list(x) + list(h)
    size = len(h)
    pre = [sum(xh[k] * weight[k][j] for k in range(len(xh))) + bias[j] for j in range(4 * size)]
    h_t, c_t = [], []
    for j in range(size):
        i_g = _sigmoid(pre[j])
        f_g = _sigmoid(pre[size + j])
        o_g = _sigmoid(pre[2 * size + j])
        g = math.tanh(pre[3 * size + j])
        c_j = f_g * c[j] + i_g * g
        c_t.append(c_j)
        h_t.append(o_g * math.tanh(c_j))
    return h_t, c_t


def softmax_ref(x: np.ndarray) -> np.ndarray:
    e = np.exp(x - x.max())
    return e / e.sum()
