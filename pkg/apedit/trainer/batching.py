from collections import Counter
from collections.abc import Callable, Iterator, Sequence

import numpy as np

from apedit.datapipe import Triple, build_word_vocab
from apedit.editops import build_op_vocab, extract_ops, op_symbol
from apedit.errors import EmptyCorpus
from apedit.logs import logs
from apedit.model import ApeModel, Batch, Example, ModelConfig
from apedit.vocab import Vocab

__all__ = ("make_batches", "oversample_concat", "encode_examples", "build_vocabs", "target_symbols")


def oversample_concat[T](large: Sequence[T], small: Sequence[T], factor: int) -> list[T]:
    """`large` followed by `factor` copies of `small`; shuffling happens when batching."""
    if factor < 1:
        raise ValueError(f"Oversampling factor must be >= 1, got {factor}")
    return [*large, *(list(small) * factor)]


def make_batches(
    examples: Sequence[Example],
    batch_size: int,
    seed: int,
    epoch: int,
    collate: Callable[[Sequence[Example]], Batch],
) -> Iterator[Batch]:
    """
    Shuffle with a generator seeded by (seed, epoch) and yield padded batches.
    The last batch of an epoch may be shorter.
    """
    if not examples:
        raise EmptyCorpus("Cannot batch an empty corpus")
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    order = np.random.default_rng([seed, epoch]).permutation(len(examples))
    for start in range(0, len(examples), batch_size):
        yield collate([examples[i] for i in order[start : start + batch_size]])


def target_symbols(triple: Triple, config: ModelConfig) -> list[str]:
    """Decoder output symbols of a triple, without the end symbol."""
    if config.target_mode == "ops":
        return [op_symbol(op) for op in extract_ops(triple.mt, triple.pe)]
    return list(triple.pe)


def build_vocabs(triples: Sequence[Triple], config: ModelConfig) -> dict[str, Vocab]:
    """
    Vocabularies of a run. In ops mode the input side is MT and the target side ops; in words mode
    `mt` holds the input sentences and `pe` the output ones.
    """
    if not triples:
        raise EmptyCorpus("Cannot build vocabularies from an empty corpus")
    vocabs = {"input": build_word_vocab((t.mt for t in triples), config.vocab_limit)}
    if config.target_mode == "ops":
        vocabs["target"] = build_op_vocab((extract_ops(t.mt, t.pe) for t in triples), config.vocab_limit)
    else:
        vocabs["target"] = build_word_vocab((t.pe for t in triples), config.vocab_limit)
    if config.architecture == "chained":
        vocabs["src"] = build_word_vocab((t.src for t in triples), config.vocab_limit)
    return vocabs


def encode_examples(triples: Sequence[Triple], model: ApeModel) -> list[Example]:
    """Map triples to ids with the model vocabularies, skipping those the model cannot encode."""
    target_vocab = model.target_vocab
    examples: list[Example] = []
    skipped: Counter[str] = Counter()
    for triple in triples:
        if not triple.mt:
            skipped["empty input"] += 1
            continue
        if model.needs_source and not triple.src:
            skipped["empty source"] += 1
            continue
        target = target_vocab.encode(target_symbols(triple, model.config)) + [target_vocab.eos_id]
        examples.append(
            Example(
                inp=model.input_vocab.encode(triple.mt),
                target=target,
                src=model.src_vocab.encode(triple.src) if model.needs_source and model.src_vocab else None,
            )
        )
    for reason, count in skipped.items():
        logs.warning(f"Skipped {count} examples ({reason})")
    return examples
