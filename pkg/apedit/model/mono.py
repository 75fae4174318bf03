from collections.abc import Sequence

import numpy as np

from apedit.model.base import ApeModel, DecodeContext, LossTerms, teacher_forced_loss
from apedit.model.batch import Batch
from apedit.model.layers import (
    BiEncoder,
    Decoder,
    DecoderState,
    Embedding,
    GlobalAttention,
    decode_step,
    decoder_init,
    encode_bidir,
    forced_attention,
    global_attention,
    gold_pointers,
)
from apedit.numcore import Tensor

__all__ = ("MonoSourceModel", "forward_mono")


class MonoSourceModel(ApeModel):
    """Single bidirectional encoder over the MT (or PE, in words mode) with global or forced attention."""

    def _build(self):
        cfg = self.config
        context_size = 2 * cfg.cell_size
        self.input_embedding = Embedding.create(self.store, "input_embedding", len(self.input_vocab), cfg.embedding_size)
        self.encoder = BiEncoder.create(self.store, "encoder", cfg.embedding_size, cfg.cell_size)
        self.attention = (
            GlobalAttention.create(self.store, "attention", context_size, cfg.cell_size, cfg.cell_size)
            if cfg.attention_mode == "global"
            else None
        )
        self.decoder = Decoder.create(
            self.store,
            "decoder",
            embedding=Embedding.create(self.store, "target_embedding", len(self.target_vocab), cfg.embedding_size),
            context_size=context_size,
            init_size=cfg.cell_size,
            cell_size=cfg.cell_size,
            vocab_size=len(self.target_vocab),
            pieces=cfg.maxout_pieces,
        )

    @property
    def target_decoder(self) -> Decoder:
        return self.decoder

    def loss(self, batch: Batch, *, train: bool = False, rng: np.random.Generator | None = None) -> LossTerms:
        loss = forward_mono(self, batch, train=train, rng=rng)
        return LossTerms(total=loss, translate=None, ape=loss)

    def prepare(self, inp: Sequence[int], src: Sequence[int] | None = None) -> DecodeContext:
        enc = encode_bidir(np.array([inp], dtype=np.int64), np.array([len(inp)]), self.input_embedding, self.encoder)
        state = decoder_init(enc.last_forward, self.decoder, self.config.dropout_p)
        keys = self.attention.keys(enc) if self.attention is not None else None
        return DecodeContext(enc=enc, state=state, keys=keys)

    def step(self, ctx: DecodeContext, prev_id: int, pointer: int) -> tuple[np.ndarray, np.ndarray]:
        if self.attention is not None:
            context, weights = global_attention(ctx.enc, ctx.state.h, self.attention, ctx.keys)
            _weights = weights.value[0]
        else:
            context = forced_attention(ctx.enc, pointer)
            _weights = np.zeros(ctx.length)
            _weights[min(pointer, ctx.length) - 1] = 1.0
        logits, ctx.state = decode_step(
            ctx.state, self.decoder.embedding(np.array([prev_id])), context, self.decoder
        )
        return logits.value[0], _weights


def forward_mono(
    model: MonoSourceModel, batch: Batch, *, train: bool = False, rng: np.random.Generator | None = None
) -> Tensor:
    """
    Teacher-forced loss of a batch. In forced mode the pointer of every step is computed from the
    gold op prefix.
    """
    model.check_batch(batch)
    enc = encode_bidir(batch.inp, batch.inp_lengths, model.input_embedding, model.encoder)
    state = decoder_init(enc.last_forward, model.decoder, model.config.dropout_p, train=train, rng=rng)

    if (attention := model.attention) is not None:
        keys = attention.keys(enc)

        def _context(_: int, s: DecoderState) -> Tensor:
            return global_attention(enc, s.h, attention, keys)[0]

    else:
        pointers = gold_pointers(batch.trg_out, model.consuming_ids)

        def _context(t: int, _: DecoderState) -> Tensor:
            return forced_attention(enc, pointers[:, t])

    return teacher_forced_loss(
        model.decoder, state, batch.trg_in, batch.trg_out, model.target_vocab.pad_id, _context
    )
