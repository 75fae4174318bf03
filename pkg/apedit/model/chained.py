"""
Chained dual-encoder model.

A SRC->MT translation branch is teacher-forced on the observed MT hypothesis. The attention context
it computes while producing MT word i is fused with the MT encoder state h'_i, and the fused vector
is what the op decoder attends to (through the forced pointer). Both branches are trained on the
unweighted sum of their losses. The MT encoder and the translation decoder share one embedding table.
"""

import dataclasses
from collections.abc import Sequence

import numpy as np

from apedit.errors import MissingSource
from apedit.model.base import ApeModel, DecodeContext, LossTerms, teacher_forced_loss
from apedit.model.batch import Batch, pad_ids
from apedit.model.layers import (
    BiEncoder,
    Decoder,
    DecoderState,
    EncoderStates,
    Embedding,
    Fusion,
    GlobalAttention,
    chained_context,
    decode_step,
    decoder_init,
    encode_bidir,
    forced_attention,
    global_attention,
    gold_pointers,
)
from apedit.numcore import Tensor, ops

__all__ = ("ChainedModel", "forward_chained")


class ChainedModel(ApeModel):
    def _build(self):
        cfg = self.config
        if self.src_vocab is None:
            raise ValueError("The chained architecture needs a 'src' vocab")
        context_size = 2 * cfg.cell_size
        # SRC -> MT
        self.src_embedding = Embedding.create(self.store, "src_embedding", len(self.src_vocab), cfg.embedding_size)
        self.src_encoder = BiEncoder.create(self.store, "src_encoder", cfg.embedding_size, cfg.cell_size)
        self.mt_embedding = Embedding.create(self.store, "mt_embedding", len(self.input_vocab), cfg.embedding_size)
        self.translate_attention = GlobalAttention.create(
            self.store, "translate_attention", context_size, cfg.cell_size, cfg.cell_size
        )
        self.translate_decoder = Decoder.create(
            self.store,
            "translate_decoder",
            embedding=self.mt_embedding,
            context_size=context_size,
            init_size=cfg.cell_size,
            cell_size=cfg.cell_size,
            vocab_size=len(self.input_vocab),
            pieces=cfg.maxout_pieces,
        )
        # MT -> OP
        self.mt_encoder = BiEncoder.create(self.store, "mt_encoder", cfg.embedding_size, cfg.cell_size)
        self.fusion = Fusion.create(self.store, "fusion", context_size, context_size)
        self.ops_decoder = Decoder.create(
            self.store,
            "ops_decoder",
            embedding=Embedding.create(self.store, "ops_embedding", len(self.target_vocab), cfg.embedding_size),
            context_size=context_size,
            init_size=cfg.cell_size,
            cell_size=cfg.cell_size,
            vocab_size=len(self.target_vocab),
            pieces=cfg.maxout_pieces,
        )

    @property
    def target_decoder(self) -> Decoder:
        return self.ops_decoder

    def _translate_targets(self, mt: np.ndarray, lengths: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        vocab = self.input_vocab
        rows = [mt[b, : lengths[b]].tolist() for b in range(mt.shape[0])]
        trg_in, _ = pad_ids([[vocab.bos_id, *r] for r in rows], vocab.pad_id)
        trg_out, _ = pad_ids([[*r, vocab.eos_id] for r in rows], vocab.pad_id)
        return trg_in, trg_out

    def fused_states(
        self,
        src: np.ndarray,
        src_lengths: np.ndarray,
        mt: np.ndarray,
        mt_lengths: np.ndarray,
        *,
        train: bool,
        rng: np.random.Generator | None,
    ) -> tuple[Tensor, EncoderStates, EncoderStates]:
        """
        Teacher-force SRC->MT and fuse its contexts with the MT encoder states.
        Returns the translation loss, the MT encoder states with fused states in place of h'_i,
        and the raw MT encoder states.
        """
        src_enc = encode_bidir(src, src_lengths, self.src_embedding, self.src_encoder)
        state = decoder_init(src_enc.last_forward, self.translate_decoder, self.config.dropout_p, train=train, rng=rng)
        keys = self.translate_attention.keys(src_enc)

        def _context(_: int, s: DecoderState) -> Tensor:
            return global_attention(src_enc, s.h, self.translate_attention, keys)[0]

        contexts: list[Tensor] = []
        trg_in, trg_out = self._translate_targets(mt, mt_lengths)
        loss_translate = teacher_forced_loss(
            self.translate_decoder, state, trg_in, trg_out, self.input_vocab.pad_id, _context, contexts
        )
        mt_enc = encode_bidir(mt, mt_lengths, self.mt_embedding, self.mt_encoder)
        # c_i is the context used to produce MT word i, the extra end-of-sentence step is dropped
        source_contexts = ops.stack(contexts[: mt_enc.length], axis=1)
        fused = chained_context(source_contexts, mt_enc.states, self.fusion)
        return loss_translate, dataclasses.replace(mt_enc, states=fused), mt_enc

    def loss(self, batch: Batch, *, train: bool = False, rng: np.random.Generator | None = None) -> LossTerms:
        return forward_chained(self, batch, train=train, rng=rng)

    def prepare(self, inp: Sequence[int], src: Sequence[int] | None = None) -> DecodeContext:
        if not src:
            raise MissingSource("The chained architecture decodes from a non empty source sentence")
        _, fused, mt_enc = self.fused_states(
            np.array([src], dtype=np.int64),
            np.array([len(src)]),
            np.array([inp], dtype=np.int64),
            np.array([len(inp)]),
            train=False,
            rng=None,
        )
        state = decoder_init(mt_enc.last_forward, self.ops_decoder, self.config.dropout_p)
        return DecodeContext(enc=fused, state=state)

    def step(self, ctx: DecodeContext, prev_id: int, pointer: int) -> tuple[np.ndarray, np.ndarray]:
        context = forced_attention(ctx.enc, pointer)
        weights = np.zeros(ctx.length)
        weights[min(pointer, ctx.length) - 1] = 1.0
        logits, ctx.state = decode_step(
            ctx.state, self.ops_decoder.embedding(np.array([prev_id])), context, self.ops_decoder
        )
        return logits.value[0], weights


def forward_chained(
    model: ChainedModel, batch: Batch, *, train: bool = False, rng: np.random.Generator | None = None
) -> LossTerms:
    """Joint loss: SRC->MT translation plus MT->OP post-editing, summed with equal weights."""
    model.check_batch(batch)
    assert batch.src is not None and batch.src_lengths is not None
    loss_translate, fused, mt_enc = model.fused_states(
        batch.src, batch.src_lengths, batch.inp, batch.inp_lengths, train=train, rng=rng
    )
    state = decoder_init(mt_enc.last_forward, model.ops_decoder, model.config.dropout_p, train=train, rng=rng)
    pointers = gold_pointers(batch.trg_out, model.consuming_ids)

    def _context(t: int, _: DecoderState) -> Tensor:
        return forced_attention(fused, pointers[:, t])

    loss_ape = teacher_forced_loss(
        model.ops_decoder, state, batch.trg_in, batch.trg_out, model.target_vocab.pad_id, _context
    )
    return LossTerms(total=ops.add(loss_translate, loss_ape), translate=loss_translate, ape=loss_ape)
