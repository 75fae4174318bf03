import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

import numpy as np

from apedit.datapipe import Triple
from apedit.errors import EmptyCorpus, NumericalError, TrainingAborted
from apedit.infer import decode_words, post_edit_corpus
from apedit.logs import TaggedLoggerAdapter, logs
from apedit.metrics import ter_corpus
from apedit.model import ApeModel, save_checkpoint
from apedit.numcore import Tape, sgd_step
from apedit.trainer.batching import encode_examples, make_batches
from apedit.trainer.config import TrainConfig, learning_rate

__all__ = ("TrainState", "train", "evaluate", "LOG_COLUMNS", "BEST_CHECKPOINT", "LAST_CHECKPOINT")

LOG_COLUMNS = ("kind", "step", "lr", "loss", "loss_translate", "loss_ape", "dev_ter", "best_ter", "checkpointed")
BEST_CHECKPOINT = "best.ckpt"
LAST_CHECKPOINT = "last.ckpt"


@dataclass
class TrainState:
    lr: float
    step: int = 0
    epoch: int = 0
    examples_seen: int = 0
    best_ter: float | None = None
    best_step: int | None = None
    best_checkpoint: Path | None = None
    evals_without_improvement: int = 0
    losses: list[float] = field(default_factory=list)
    # (translate, ape) terms of every step, translate is None for mono-source models
    loss_terms: list[tuple[float | None, float]] = field(default_factory=list)
    dev_history: list[tuple[int, float]] = field(default_factory=list)
    stop_reason: str = ""


def evaluate(model: ApeModel, dev: Sequence[Triple], *, max_extra: int = 50, threads: int = 1) -> float:
    """Greedy-decode the dev inputs and return the corpus TER (x100) against their references."""
    if not dev:
        raise EmptyCorpus("Cannot evaluate on an empty dev set")
    if model.config.target_mode == "ops":
        outputs = post_edit_corpus(
            model, [(t.src if model.needs_source else None, t.mt) for t in dev], max_extra=max_extra, threads=threads
        )
    else:
        outputs = [decode_words(model, t.mt) if t.mt else [] for t in dev]
    return ter_corpus(list(zip(outputs, (t.pe for t in dev))), threads=threads)


class _TsvLog:
    def __init__(self, f: TextIO | None):
        self.f = f
        if f is not None:
            f.write("\t".join(LOG_COLUMNS) + "\n")

    def write(self, **values):
        if self.f is None:
            return
        self.f.write("\t".join(_format(values.get(c)) for c in LOG_COLUMNS) + "\n")
        self.f.flush()


def _format(value) -> str:
    match value:
        case None:
            return ""
        case bool():
            return str(int(value))
        case float():
            return f"{value:.6g}"
        case _:
            return str(value)


def train(
    model: ApeModel,
    corpus: Sequence[Triple],
    dev: Sequence[Triple],
    config: TrainConfig,
    *,
    output_dir: Path | None = None,
    threads: int = 1,
) -> TrainState:
    """
    SGD with teacher forcing, a step-wise decayed learning rate and periodic dev evaluation.
    The checkpoint with the lowest dev TER is kept in `output_dir/best.ckpt`, the log in
    `output_dir/train.tsv`. Training stops after `max_steps` or once `patience` evaluations in a row did
    not improve the dev TER.
    """
    _logs = TaggedLoggerAdapter(logs, {"tag": f"train {model.config.name}"})
    examples = encode_examples(corpus, model)
    if not examples:
        raise EmptyCorpus("No usable training example")
    corpus_size = len(examples)
    rng = np.random.default_rng(config.seed)
    state = TrainState(lr=config.initial_lr)

    if output_dir is not None:
        output_dir.mkdir(parents=True, exist_ok=True)
    log_file = (output_dir / "train.tsv").open("w", encoding="utf-8") if output_dir is not None else None
    tsv = _TsvLog(log_file)
    _logs.info(f"Training on {corpus_size} examples, {len(dev)} dev examples, {len(model.parameters())} tensors")

    def _evaluate():
        dev_ter = evaluate(model, dev, max_extra=config.max_extra, threads=threads)
        improved = state.best_ter is None or dev_ter < state.best_ter
        state.dev_history.append((state.step, dev_ter))
        if improved:
            state.best_ter, state.best_step = dev_ter, state.step
            state.evals_without_improvement = 0
            if output_dir is not None:
                state.best_checkpoint = output_dir / BEST_CHECKPOINT
                save_checkpoint(model, state.best_checkpoint, meta={"step": state.step, "dev_ter": dev_ter})
        else:
            state.evals_without_improvement += 1
        tsv.write(
            kind="eval", step=state.step, lr=state.lr, dev_ter=dev_ter, best_ter=state.best_ter, checkpointed=improved
        )
        _logs.info(f"step {state.step}: dev TER {dev_ter:.2f} (best {state.best_ter:.2f} at step {state.best_step})")

    last_eval_step = -1
    try:
        while not state.stop_reason:
            for batch in make_batches(examples, config.batch_size, config.seed, state.epoch, model.collate):
                state.lr = learning_rate(config, state.examples_seen, corpus_size)
                try:
                    with Tape() as tape:
                        terms = model.loss(batch, train=True, rng=rng)
                    tape.backward(terms.total)
                    norm = sgd_step(model.parameters(), state.lr, config.clip_norm)
                except NumericalError as e:
                    raise TrainingAborted(state.step + 1, str(e)) from e
                if not math.isfinite(norm):
                    raise TrainingAborted(state.step + 1, f"non-finite gradient norm {norm}")
                state.step += 1
                state.examples_seen += batch.size
                loss = terms.total.item()
                loss_translate = terms.translate.item() if terms.translate is not None else None
                loss_ape = terms.ape.item()
                state.losses.append(loss)
                state.loss_terms.append((loss_translate, loss_ape))
                tsv.write(
                    kind="step",
                    step=state.step,
                    lr=state.lr,
                    loss=loss,
                    loss_translate=loss_translate,
                    loss_ape=loss_ape,
                )
                _logs.debug(f"step {state.step}: loss {loss:.4f} lr {state.lr:.4g}")

                if dev and state.step % config.eval_every_steps == 0:
                    _evaluate()
                    last_eval_step = state.step
                    if config.patience is not None and state.evals_without_improvement >= config.patience:
                        state.stop_reason = "patience"
                if state.step >= config.max_steps:
                    state.stop_reason = state.stop_reason or "max_steps"
                if state.stop_reason:
                    break
            state.epoch += 1

        if dev and last_eval_step != state.step:
            _evaluate()
    except TrainingAborted as e:
        _logs.error(str(e))
        raise
    finally:
        if log_file is not None:
            log_file.close()

    if output_dir is not None:
        save_checkpoint(model, output_dir / LAST_CHECKPOINT, meta={"step": state.step})
    _logs.info(f"Stopped after {state.step} steps ({state.stop_reason}), best dev TER {state.best_ter}")
    return state
