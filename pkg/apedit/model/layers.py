"""
Building blocks shared by the mono-source and chained architectures.

Shapes: B batch, A encoder length, E embedding size, C cell size. Encoder states concatenate the
forward and backward LSTM outputs so they are 2C wide, and so is every attention context.
"""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from apedit.editops import Del, EditOp, Keep
from apedit.errors import EmptyInput, ShapeMismatch
from apedit.numcore import LSTMParams, Linear, Parameter, ParameterStore, Tensor, lstm_step, ops

__all__ = (
    "MASK_VALUE",
    "Embedding",
    "BiEncoder",
    "EncoderStates",
    "GlobalAttention",
    "Fusion",
    "Decoder",
    "DecoderState",
    "encode_bidir",
    "global_attention",
    "forced_pointer",
    "gold_pointers",
    "forced_attention",
    "chained_context",
    "decoder_init",
    "decode_step",
)

# Added to the attention scores of padded encoder positions
MASK_VALUE = -1e9


@dataclass
class Embedding:
    table: Parameter

    @classmethod
    def create(cls, store: ParameterStore, name: str, vocab_size: int, size: int) -> "Embedding":
        return cls(table=store.uniform(f"{name}.table", (vocab_size, size)))

    @property
    def size(self) -> int:
        return self.table.shape[1]

    def __call__(self, ids: np.ndarray) -> Tensor:
        return ops.embedding_lookup(self.table, ids)


@dataclass
class BiEncoder:
    forward: LSTMParams
    backward: LSTMParams

    @classmethod
    def create(cls, store: ParameterStore, name: str, input_size: int, cell_size: int) -> "BiEncoder":
        return cls(
            forward=LSTMParams.create(store, f"{name}.forward", input_size, cell_size),
            backward=LSTMParams.create(store, f"{name}.backward", input_size, cell_size),
        )

    @property
    def cell_size(self) -> int:
        return self.forward.hidden_size


@dataclass
class EncoderStates:
    states: Tensor
    last_forward: Tensor
    lengths: np.ndarray

    @property
    def length(self) -> int:
        return self.states.shape[1]

    @property
    def width(self) -> int:
        return self.states.shape[2]

    def score_mask(self) -> Tensor | None:
        """Additive attention mask, None when no position is padded."""
        padded = np.arange(self.length)[None, :] >= self.lengths[:, None]
        if not padded.any():
            return None
        return ops.constant(np.where(padded, MASK_VALUE, 0.0))


def _carry(keep_new: np.ndarray, new: Tensor, old: Tensor) -> Tensor:
    """Per-row select between the new and the previous recurrent state."""
    if keep_new.all():
        return new
    mask = ops.constant(keep_new[:, None].astype(float))
    return ops.add(ops.mul(mask, new), ops.mul(ops.constant(1.0 - mask.value), old))


def encode_bidir(ids: np.ndarray, lengths: np.ndarray, embedding: Embedding, encoder: BiEncoder) -> EncoderStates:
    """
    Run the forward and backward LSTMs over padded `ids` (B, A).
    Padded positions leave the recurrent state untouched, so the backward pass of every row starts
    at its own last token.
    """
    if ids.ndim != 2 or ids.shape[1] == 0 or np.any(lengths < 1):
        raise EmptyInput("Cannot encode an empty sequence")
    batch, length = ids.shape
    size = encoder.cell_size
    embedded = [embedding(ids[:, t]) for t in range(length)]
    zeros = ops.constant(np.zeros((batch, size)))

    h, c = zeros, zeros
    forward_states: list[Tensor] = []
    for t in range(length):
        h_t, c_t = lstm_step(embedded[t], h, c, encoder.forward)
        valid = t < lengths
        h, c = _carry(valid, h_t, h), _carry(valid, c_t, c)
        forward_states.append(h)
    last_forward = h

    h, c = zeros, zeros
    backward_states: list[Tensor] = [zeros] * length
    for t in reversed(range(length)):
        h_t, c_t = lstm_step(embedded[t], h, c, encoder.backward)
        valid = t < lengths
        h, c = _carry(valid, h_t, h), _carry(valid, c_t, c)
        backward_states[t] = h

    states = ops.stack([ops.concat([f, b]) for f, b in zip(forward_states, backward_states)], axis=1)
    return EncoderStates(states=states, last_forward=last_forward, lengths=lengths)


@dataclass
class GlobalAttention:
    """e_i = v . tanh(W1 h_i + W2 s + b2)"""

    w_enc: Parameter
    w_dec: Parameter
    bias: Parameter
    v: Parameter

    @classmethod
    def create(cls, store: ParameterStore, name: str, enc_size: int, dec_size: int, size: int) -> "GlobalAttention":
        return cls(
            w_enc=store.uniform(f"{name}.w_enc", (enc_size, size)),
            w_dec=store.uniform(f"{name}.w_dec", (dec_size, size)),
            bias=store.zeros(f"{name}.bias", (size,)),
            v=store.uniform(f"{name}.v", (size, 1)),
        )

    def keys(self, enc: EncoderStates) -> Tensor:
        """W1 h_i for every encoder position, independent of the decoder step."""
        return ops.matmul(enc.states, self.w_enc)


def global_attention(
    enc: EncoderStates, s: Tensor, attention: GlobalAttention, keys: Tensor | None = None
) -> tuple[Tensor, Tensor]:
    """Returns the (B, 2C) context and the (B, A) attention weights for decoder state `s` (B, C)."""
    _keys = keys if keys is not None else attention.keys(enc)
    batch = s.shape[0]
    query = ops.reshape(ops.linear(s, attention.w_dec, attention.bias), (batch, 1, -1))
    hidden = ops.tanh(ops.add(_keys, query))
    scores = ops.reshape(ops.matmul(hidden, attention.v), (batch, enc.length))
    if (mask := enc.score_mask()) is not None:
        scores = ops.add(scores, mask)
    weights = ops.softmax(scores)
    context = ops.matmul(ops.reshape(weights, (batch, 1, enc.length)), enc.states)
    return ops.reshape(context, (batch, enc.width)), weights


def forced_pointer(past_ops: Sequence[EditOp]) -> int:
    """1-based position of the MT word aligned with the next op: #KEEP + #DEL + 1."""
    return sum(1 for op in past_ops if isinstance(op, (Keep, Del))) + 1


def gold_pointers(targets: np.ndarray, consuming_ids: Sequence[int]) -> np.ndarray:
    """Forced pointer at every step of teacher-forced op sequences (B, T), 1-based."""
    consumed = np.isin(targets, consuming_ids).astype(np.int64)
    return np.cumsum(consumed, axis=1) - consumed + 1


def forced_attention(enc: EncoderStates, pointer: np.ndarray | int) -> Tensor:
    """
    Hard attention on h_i. Pointers past the end of a row (i = A + 1 once every word is consumed)
    are clamped to its last state.
    """
    _pointer = np.broadcast_to(np.asarray(pointer, dtype=np.int64), enc.lengths.shape)
    if np.any(_pointer < 1):
        raise ValueError(f"Forced pointers are 1-based, got {_pointer.min()}")
    index = np.minimum(_pointer, enc.lengths) - 1
    return ops.gather_rows(enc.states, index)


@dataclass
class Fusion:
    """c'_i = tanh(H1 c_i + H2 h'_i + b')"""

    w_src: Parameter
    w_mt: Parameter
    bias: Parameter

    @classmethod
    def create(cls, store: ParameterStore, name: str, src_size: int, mt_size: int) -> "Fusion":
        return cls(
            w_src=store.uniform(f"{name}.w_src", (src_size, mt_size)),
            w_mt=store.uniform(f"{name}.w_mt", (mt_size, mt_size)),
            bias=store.zeros(f"{name}.bias", (mt_size,)),
        )


def chained_context(c: Tensor, h_mt: Tensor, fusion: Fusion) -> Tensor:
    """Fuse source-side attention contexts with MT encoder states, any leading shape."""
    if c.shape[:-1] != h_mt.shape[:-1]:
        raise ShapeMismatch(f"chained_context: contexts {c.shape} and MT states {h_mt.shape} do not line up")
    return ops.tanh(ops.add(ops.add(ops.matmul(c, fusion.w_src), ops.matmul(h_mt, fusion.w_mt)), fusion.bias))


@dataclass
class DecoderState:
    h: Tensor
    c: Tensor


@dataclass
class Decoder:
    embedding: Embedding
    init: Linear
    cell: LSTMParams
    maxout: Linear
    projection: Linear
    pieces: int

    @classmethod
    def create(
        cls,
        store: ParameterStore,
        name: str,
        *,
        embedding: Embedding,
        context_size: int,
        init_size: int,
        cell_size: int,
        vocab_size: int,
        pieces: int,
    ) -> "Decoder":
        return cls(
            embedding=embedding,
            init=Linear.create(store, f"{name}.init", init_size, cell_size),
            cell=LSTMParams.create(store, f"{name}.cell", embedding.size + context_size, cell_size),
            maxout=Linear.create(store, f"{name}.maxout", cell_size + context_size + embedding.size, pieces * cell_size),
            projection=Linear.create(store, f"{name}.projection", cell_size, vocab_size),
            pieces=pieces,
        )

    @property
    def vocab_size(self) -> int:
        return self.projection.out_size


def decoder_init(
    last_forward: Tensor,
    decoder: Decoder,
    dropout_p: float,
    *,
    train: bool = False,
    rng: np.random.Generator | None = None,
) -> DecoderState:
    """s_0 = dropout(tanh(W last_forward + b)), with a zero memory cell."""
    h = ops.dropout(ops.tanh(decoder.init(last_forward)), dropout_p, rng, train)
    return DecoderState(h=h, c=ops.constant(np.zeros(h.shape)))


def decode_step(
    state: DecoderState, prev_embedding: Tensor, context: Tensor, decoder: Decoder
) -> tuple[Tensor, DecoderState]:
    """Advance the decoder LSTM on [prev embedding; context] and project to vocabulary logits."""
    if prev_embedding.shape[0] != context.shape[0]:
        raise ShapeMismatch(f"decode_step: embedding {prev_embedding.shape} and context {context.shape}")
    h, c = lstm_step(ops.concat([prev_embedding, context]), state.h, state.c, decoder.cell)
    hidden = ops.maxout(decoder.maxout(ops.concat([h, context, prev_embedding])), decoder.pieces)
    return decoder.projection(hidden), DecoderState(h=h, c=c)
