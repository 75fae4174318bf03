"""Tiny models and data for full-model gradient checks."""

from collections import Counter

import numpy as np

from apedit.editops import build_op_vocab, extract_ops, op_symbol, tokenize
from apedit.model.base import ApeModel
from apedit.model.batch import Batch, Example
from apedit.model.config import Architecture, AttentionMode, ModelConfig, TargetMode
from apedit.numcore import GradCheckReport, float64_mode, grad_check
from apedit.vocab import Vocab

__all__ = ("TOY_TRIPLES", "toy_vocabs", "toy_model", "toy_batch", "toy_grad_check")

# (src, mt, pe), at most 4 tokens per sentence
TOY_TRIPLES = [
    ("x y z", "a b c", "a c b b"),
    ("y x", "c a", "c b a"),
    ("z", "b", "b a"),
    ("x z y", "a c a b", "c a b"),
]
TOY_VOCAB_SIZE = 7


def toy_vocabs(target_mode: TargetMode = "ops", chained: bool = False) -> dict[str, Vocab]:
    triples = [tuple(tokenize(s) for s in t) for t in TOY_TRIPLES]
    vocabs = {"input": Vocab.words(Counter(w for _, mt, _ in triples for w in mt), TOY_VOCAB_SIZE)}
    if target_mode == "ops":
        vocabs["target"] = build_op_vocab([extract_ops(mt, pe) for _, mt, pe in triples], TOY_VOCAB_SIZE)
    else:
        vocabs["target"] = Vocab.words(Counter(w for _, _, pe in triples for w in pe), TOY_VOCAB_SIZE)
    if chained:
        vocabs["src"] = Vocab.words(Counter(w for src, _, _ in triples for w in src), TOY_VOCAB_SIZE)
    return vocabs


def toy_model(
    architecture: Architecture = "mono_source",
    attention_mode: AttentionMode = "forced",
    target_mode: TargetMode = "ops",
    *,
    cell_size: int = 3,
    embedding_size: int = 3,
    init_scale: float = 0.5,
    seed: int = 0,
) -> ApeModel:
    from apedit.model import create_model

    config = ModelConfig(
        cell_size=cell_size,
        embedding_size=embedding_size,
        vocab_limit=TOY_VOCAB_SIZE,
        attention_mode=attention_mode,
        architecture=architecture,
        target_mode=target_mode,
        maxout_pieces=2,
        dropout_p=0.0,
        init_scale=init_scale,
        seed=seed,
    )
    return create_model(config, toy_vocabs(target_mode, chained=architecture == "chained"))


def toy_batch(model: ApeModel, size: int = 2) -> Batch:
    """The first `size` toy triples, encoded with the model vocabularies."""
    examples = []
    for src, mt, pe in TOY_TRIPLES[:size]:
        _src, _mt, _pe = tokenize(src), tokenize(mt), tokenize(pe)
        if model.config.target_mode == "ops":
            symbols = [op_symbol(op) for op in extract_ops(_mt, _pe)]
        else:
            symbols = _pe
        examples.append(
            Example(
                inp=model.input_vocab.encode(_mt),
                target=model.target_vocab.encode(symbols) + [model.target_vocab.eos_id],
                src=model.src_vocab.encode(_src) if model.src_vocab is not None else None,
            )
        )
    return model.collate(examples)


def toy_grad_check(
    architecture: Architecture = "mono_source",
    attention_mode: AttentionMode = "forced",
    target_mode: TargetMode = "ops",
    *,
    cell_size: int = 3,
    seed: int = 0,
    max_entries: int = 200,
) -> GradCheckReport:
    """Finite-difference check of every parameter of a tiny model on a padded batch of 2."""
    with float64_mode():
        model = toy_model(architecture, attention_mode, target_mode, cell_size=cell_size, embedding_size=cell_size, seed=seed)
        batch = toy_batch(model)
        return grad_check(
            lambda: model.loss(batch).total,
            model.parameters(),
            max_entries=max_entries,
            seed=int(np.random.default_rng(seed).integers(1 << 31)),
        )
