"""
Greedy decoding.

Op decoding keeps the forced pointer up to date and masks invalid symbols: once every MT word has
been consumed, KEEP and DEL can no longer be produced, so decoded scripts can always be applied.
"""

from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from rich.progress import track

from apedit.editops import EOS, Del, EditScript, Keep, Sentence, apply_ops, parse_op
from apedit.errors import ApeError, EmptyInput, MissingSource, WrongMode
from apedit.logs import TaggedLoggerAdapter, logs
from apedit.model import ApeModel
from apedit.numcore import no_tape

__all__ = (
    "DEFAULT_MAX_EXTRA",
    "DEFAULT_MAX_LEN",
    "decode_ops",
    "decode_ops_aligned",
    "decode_words",
    "post_edit",
    "post_edit_corpus",
    "decode_corpus",
    "DecodeResult",
)

DEFAULT_MAX_EXTRA = 50
DEFAULT_MAX_LEN = 100


def _check_ops_model(model: ApeModel, src: Sequence[str] | None, mt: Sequence[str]):
    if model.config.target_mode != "ops":
        raise WrongMode(f"Op decoding needs a model trained on ops, got target_mode={model.config.target_mode!r}")
    if not mt:
        raise EmptyInput("Cannot post-edit an empty MT sentence")
    if model.needs_source and not src:
        raise MissingSource("The chained model needs the source sentence of every MT hypothesis")


def decode_ops_aligned(
    model: ApeModel, src: Sequence[str] | None, mt: Sequence[str], max_extra: int = DEFAULT_MAX_EXTRA
) -> tuple[EditScript, np.ndarray]:
    """
    Greedy op decoding, also returning the (ops, |mt|) alignment matrix: attention weights with global
    attention, one-hot pointer positions with forced attention. The final row belongs to EOS.
    """
    _check_ops_model(model, src, mt)
    vocab = model.target_vocab
    keep_id, del_id = vocab.id("KEEP"), vocab.id("DEL")
    max_ops = len(mt) + max_extra

    script: EditScript = []
    rows: list[np.ndarray] = []
    pointer, prev_id = 1, model.start_id
    with no_tape():
        ctx = model.prepare(
            model.input_vocab.encode(mt),
            model.src_vocab.encode(src) if model.needs_source and model.src_vocab and src else None,
        )
        while True:
            logits, weights = model.step(ctx, prev_id, pointer)
            rows.append(weights)
            if len(script) >= max_ops:
                break
            logits = logits.astype(np.float64)
            logits[vocab.pad_id] = -np.inf
            if pointer > len(mt):
                logits[[keep_id, del_id]] = -np.inf
            prev_id = int(np.argmax(logits))
            if prev_id == vocab.eos_id:
                break
            op = parse_op(vocab.itos[prev_id])
            script.append(op)
            if isinstance(op, (Keep, Del)):
                pointer += 1
    script.append(EOS)
    return script, np.stack(rows)


def decode_ops(
    model: ApeModel, src: Sequence[str] | None, mt: Sequence[str], max_extra: int = DEFAULT_MAX_EXTRA
) -> EditScript:
    """Greedy edit script for `mt`, always ending with EOS and never consuming more than |mt| words."""
    return decode_ops_aligned(model, src, mt, max_extra)[0]


def decode_words(model: ApeModel, inp: Sequence[str], max_len: int = DEFAULT_MAX_LEN) -> Sentence:
    """Greedy translation with a words-mode model, stopping at the end symbol or after `max_len` words."""
    if model.config.target_mode != "words":
        raise WrongMode(f"Word decoding needs a model trained on words, got target_mode={model.config.target_mode!r}")
    if max_len <= 0:
        return []
    if not inp:
        raise EmptyInput("Cannot translate an empty sentence")
    vocab = model.target_vocab
    output: Sentence = []
    prev_id = model.start_id
    with no_tape():
        ctx = model.prepare(model.input_vocab.encode(inp))
        for _ in range(max_len):
            logits, _ = model.step(ctx, prev_id, 1)
            logits = logits.astype(np.float64)
            logits[[vocab.pad_id, vocab.bos_id]] = -np.inf
            prev_id = int(np.argmax(logits))
            if prev_id == vocab.eos_id:
                break
            output.append(vocab.itos[prev_id])
    return output


def post_edit(
    model: ApeModel,
    src: Sequence[str] | None,
    mt: Sequence[str],
    max_extra: int = DEFAULT_MAX_EXTRA,
    unk_placeholder: str | None = None,
) -> Sentence:
    return apply_ops(mt, decode_ops(model, src, mt, max_extra), unk_placeholder=unk_placeholder)


@dataclass
class DecodeResult:
    output: Sentence
    script: EditScript
    alignment: np.ndarray | None = None
    error: ApeError | None = None


def decode_corpus(
    model: ApeModel,
    inputs: Sequence[tuple[Sequence[str] | None, Sequence[str]]],
    *,
    max_extra: int = DEFAULT_MAX_EXTRA,
    unk_placeholder: str | None = None,
    threads: int = 1,
    show_progress: bool = False,
) -> list[DecodeResult]:
    """
    Decode and apply a script for every (src, mt) pair, preserving order.
    A sentence that fails to decode is logged and left unedited, with the error kept on its result.
    """

    def _run(index: int) -> DecodeResult:
        src, mt = inputs[index]
        try:
            script, alignment = decode_ops_aligned(model, src, mt, max_extra)
            return DecodeResult(apply_ops(mt, script, unk_placeholder=unk_placeholder), script, alignment)
        except ApeError as e:
            TaggedLoggerAdapter(logs, {"tag": "decode", "index": index}).warning(
                f"Keeping the MT hypothesis unchanged: {e}"
            )
            return DecodeResult(list(mt), [EOS], error=e)

    indices = range(len(inputs))
    if threads <= 1:
        return [_run(i) for i in track(indices, disable=not show_progress, description="Decoding...")]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(
            track(executor.map(_run, indices), total=len(inputs), disable=not show_progress, description="Decoding...")
        )


def post_edit_corpus(
    model: ApeModel,
    inputs: Sequence[tuple[Sequence[str] | None, Sequence[str]]],
    *,
    max_extra: int = DEFAULT_MAX_EXTRA,
    unk_placeholder: str | None = None,
    threads: int = 1,
    errors: dict[int, ApeError] | None = None,
    show_progress: bool = False,
) -> list[Sentence]:
    """Post-edited sentences in input order; failures are recorded in `errors` by index."""
    results = decode_corpus(
        model,
        inputs,
        max_extra=max_extra,
        unk_placeholder=unk_placeholder,
        threads=threads,
        show_progress=show_progress,
    )
    if errors is not None:
        errors.update({i: r.error for i, r in enumerate(results) if r.error is not None})
    return [r.output for r in results]
