from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from apedit.errors import InvalidTarget

__all__ = ("Example", "Batch", "pad_ids")


@dataclass
class Example:
    """
    Encoded training example.
    `inp` is the encoder input (MT in ops mode), `target` the decoder output ending with the end symbol,
    `src` is only set for the chained architecture.
    """

    inp: list[int]
    target: list[int]
    src: list[int] | None = None


def pad_ids(rows: Sequence[Sequence[int]], pad_id: int) -> tuple[np.ndarray, np.ndarray]:
    """Right-pad integer rows into a (B, max_len) matrix, returning it with the row lengths."""
    lengths = np.array([len(r) for r in rows], dtype=np.int64)
    out = np.full((len(rows), int(lengths.max(initial=0))), pad_id, dtype=np.int64)
    for i, row in enumerate(rows):
        out[i, : len(row)] = row
    return out, lengths


@dataclass
class Batch:
    inp: np.ndarray
    inp_lengths: np.ndarray
    trg_in: np.ndarray
    trg_out: np.ndarray
    trg_lengths: np.ndarray
    src: np.ndarray | None = None
    src_lengths: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.inp.shape[0]

    @property
    def trg_mask(self) -> np.ndarray:
        """True on real (non padded) target positions."""
        return np.arange(self.trg_out.shape[1])[None, :] < self.trg_lengths[:, None]

    @classmethod
    def collate(
        cls,
        examples: Sequence[Example],
        *,
        inp_pad: int,
        trg_pad: int,
        start_id: int,
        src_pad: int | None = None,
    ) -> "Batch":
        """
        Pad a list of examples. The decoder input is the target shifted right behind `start_id`
        (teacher forcing).
        """
        if not examples:
            raise ValueError("Cannot collate an empty list of examples")
        if any(not e.target for e in examples):
            raise InvalidTarget("Target sequences must at least contain the end symbol")
        inp, inp_lengths = pad_ids([e.inp for e in examples], inp_pad)
        trg_out, trg_lengths = pad_ids([e.target for e in examples], trg_pad)
        trg_in, _ = pad_ids([[start_id, *e.target[:-1]] for e in examples], trg_pad)
        src = src_lengths = None
        if any(e.src is not None for e in examples):
            if src_pad is None:
                raise ValueError("Examples have a source side but no source padding id was given")
            src, src_lengths = pad_ids([e.src or [] for e in examples], src_pad)
        return cls(
            inp=inp,
            inp_lengths=inp_lengths,
            trg_in=trg_in,
            trg_out=trg_out,
            trg_lengths=trg_lengths,
            src=src,
            src_lengths=src_lengths,
        )
