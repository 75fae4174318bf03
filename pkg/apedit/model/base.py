import abc
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from apedit.errors import InvalidTarget, VocabMismatch
from apedit.model.batch import Batch, Example
from apedit.model.config import ModelConfig
from apedit.model.layers import Decoder, DecoderState, EncoderStates, decode_step
from apedit.numcore import Parameter, ParameterStore, Tensor, ops
from apedit.vocab import Vocab

__all__ = ("ApeModel", "LossTerms", "DecodeContext", "teacher_forced_loss", "VOCAB_ROLES")

# "src" only exists for the chained architecture
VOCAB_ROLES = ("src", "input", "target")

type ContextFn = Callable[[int, DecoderState], Tensor]


class LossTerms(NamedTuple):
    total: Tensor
    translate: Tensor | None
    ape: Tensor


@dataclass
class DecodeContext:
    """Everything a greedy decoder needs between two steps, for a single sentence."""

    enc: EncoderStates
    state: DecoderState
    keys: Tensor | None = None

    @property
    def length(self) -> int:
        return int(self.enc.lengths[0])


def teacher_forced_loss(
    decoder: Decoder,
    state: DecoderState,
    trg_in: np.ndarray,
    trg_out: np.ndarray,
    pad_id: int,
    context_at: ContextFn,
    contexts: list[Tensor] | None = None,
) -> Tensor:
    """
    Mean cross-entropy over the non padded positions of `trg_out`, feeding the gold previous symbols.
    `context_at(t, state)` returns the attention context of step t; when `contexts` is given, each
    step context is appended to it.
    """
    logits: list[Tensor] = []
    for t in range(trg_in.shape[1]):
        context = context_at(t, state)
        if contexts is not None:
            contexts.append(context)
        step_logits, state = decode_step(state, decoder.embedding(trg_in[:, t]), context, decoder)
        logits.append(step_logits)
    flat = ops.reshape(ops.stack(logits, axis=1), (-1, decoder.vocab_size))
    return ops.cross_entropy(ops.log_softmax(flat), trg_out.reshape(-1), ignore_index=pad_id, reduction="mean")


class ApeModel(abc.ABC):
    """Parameters, vocabularies and forward passes of one architecture."""

    def __init__(self, config: ModelConfig, vocabs: dict[str, Vocab]):
        self.config = config
        self.vocabs = vocabs
        self.store = ParameterStore(np.random.default_rng(config.seed), config.init_scale)
        self._build()

    @abc.abstractmethod
    def _build(self): ...

    @abc.abstractmethod
    def loss(self, batch: Batch, *, train: bool = False, rng: np.random.Generator | None = None) -> LossTerms: ...

    @abc.abstractmethod
    def prepare(self, inp: Sequence[int], src: Sequence[int] | None = None) -> DecodeContext: ...

    @abc.abstractmethod
    def step(self, ctx: DecodeContext, prev_id: int, pointer: int) -> tuple[np.ndarray, np.ndarray]:
        """Advance `ctx` by one symbol, returning the logits and the attention weights over the input."""

    @property
    @abc.abstractmethod
    def target_decoder(self) -> Decoder: ...

    @property
    def input_vocab(self) -> Vocab:
        return self.vocabs["input"]

    @property
    def target_vocab(self) -> Vocab:
        return self.vocabs["target"]

    @property
    def src_vocab(self) -> Vocab | None:
        return self.vocabs.get("src")

    @property
    def needs_source(self) -> bool:
        return self.config.architecture == "chained"

    @property
    def start_id(self) -> int:
        return self.target_vocab.bos_id

    @property
    def consuming_ids(self) -> tuple[int, ...]:
        """Target ids moving the forced pointer (KEEP and DEL)."""
        if self.config.target_mode != "ops":
            return ()
        return self.target_vocab.id("KEEP"), self.target_vocab.id("DEL")

    def parameters(self) -> list[Parameter]:
        return list(self.store)

    def zero_grad(self):
        self.store.zero_grad()

    def collate(self, examples: Sequence[Example]) -> Batch:
        src_vocab = self.src_vocab
        return Batch.collate(
            examples,
            inp_pad=self.input_vocab.pad_id,
            trg_pad=self.target_vocab.pad_id,
            start_id=self.start_id,
            src_pad=src_vocab.pad_id if src_vocab is not None else None,
        )

    def check_batch(self, batch: Batch):
        """Targets must end with the end symbol and every id must exist in its vocabulary."""
        last = batch.trg_out[np.arange(batch.size), batch.trg_lengths - 1]
        if np.any(last != self.target_vocab.eos_id):
            raise InvalidTarget(f"Every target must end with {self.target_vocab.eos!r}")
        sides = [("input", batch.inp), ("target", batch.trg_out)]
        if self.needs_source:
            if batch.src is None or batch.src_lengths is None or np.any(batch.src_lengths < 1):
                raise InvalidTarget("The chained architecture needs a non empty source sentence per example")
            sides.append(("src", batch.src))
        for role, ids in sides:
            if ids.size and (ids.min() < 0 or ids.max() >= len(self.vocabs[role])):
                raise VocabMismatch(
                    f"{role!r} ids outside of [0, {len(self.vocabs[role])}), was the corpus encoded with another vocab?"
                )
