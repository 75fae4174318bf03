import sys
from pathlib import Path
from typing import Any

from piou import Option

from apedit import env
from apedit.cli.app import ConfigOption, SeedOption, ThreadsOption, cli, start_run
from apedit.datapipe import Triple, load_triples, split_dev
from apedit.errors import NumericalError
from apedit.logs import logs
from apedit.model import ModelConfig, create_model
from apedit.model.toy import toy_grad_check
from apedit.trainer import TrainConfig, build_vocabs, oversample_concat, train
from apedit.utils import section

__all__ = ("run_train", "run_grad_check", "load_training_data")

# (architecture, attention, target) checked when no architecture is given
GRAD_CHECK_MODELS = (
    ("mono_source", "global", "ops"),
    ("mono_source", "forced", "ops"),
    ("mono_source", "global", "words"),
    ("chained", "forced", "ops"),
)


def _path(data: dict[str, Any], key: str) -> Path | None:
    value = data.get(key)
    return Path(value) if value is not None else None


def load_training_data(
    data: dict[str, Any], config: ModelConfig, seed: int
) -> tuple[list[Triple], list[Triple]]:
    """
    Training and dev triples from the `data.*` keys of a run.
    Without dev files, a held-out part of the real corpus is used as dev set.
    A synthetic corpus (`data.synthetic` prefix) is concatenated with `data.oversample` copies of the real one.
    """
    mt, pe = _path(data, "mt"), _path(data, "pe")
    if mt is None or pe is None:
        raise ValueError("data.mt and data.pe are required")
    chained = config.architecture == "chained"
    src = _path(data, "src")
    if chained and src is None:
        raise ValueError("The chained architecture needs data.src")
    real = load_triples(src if chained else None, mt, pe)

    if (dev_mt := _path(data, "dev_mt")) is not None:
        dev_pe = _path(data, "dev_pe")
        if dev_pe is None:
            raise ValueError("data.dev_mt needs data.dev_pe")
        dev_src = _path(data, "dev_src")
        if chained and dev_src is None:
            raise ValueError("The chained architecture needs data.dev_src")
        dev = load_triples(dev_src if chained else None, dev_mt, dev_pe)
    else:
        dev_size = int(data.get("dev_size") or max(1, len(real) // 10))
        real, dev = split_dev(real, dev_size, seed)
        logs.info(f"Holding out {len(dev)} of the training triples as dev set")

    if (prefix := _path(data, "synthetic")) is not None:
        synthetic = load_triples(
            prefix.with_name(f"{prefix.name}.src") if chained else None,
            prefix.with_name(f"{prefix.name}.mt"),
            prefix.with_name(f"{prefix.name}.pe"),
        )
        corpus = oversample_concat(synthetic, real, int(data.get("oversample") or 1))
        logs.info(f"Training on {len(synthetic)} synthetic and {len(corpus) - len(synthetic)} real triples")
    else:
        corpus = real
    return corpus, dev


@cli.command("train", help="Train a post-editing model, keeping the checkpoint with the best dev TER")
def run_train(
    config_file: Path | None = ConfigOption,
    src: Path | None = Option(None, "--src", help="Source file (chained architecture)"),
    mt: Path | None = Option(None, "--mt", help="MT file (input side in words mode)"),
    pe: Path | None = Option(None, "--pe", help="Post-edited file (output side in words mode)"),
    dev_src: Path | None = Option(None, "--dev-src", help="Dev source file"),
    dev_mt: Path | None = Option(None, "--dev-mt", help="Dev MT file"),
    dev_pe: Path | None = Option(None, "--dev-pe", help="Dev post-edited file"),
    dev_size: int | None = Option(None, "--dev-size", help="Held-out dev size when no dev files are given"),
    synthetic: Path | None = Option(None, "--synthetic", help="Prefix of a synthetic corpus (.src/.mt/.pe)"),
    oversample: int | None = Option(None, "--oversample", help="Copies of the real corpus added to --synthetic"),
    output_dir: Path | None = Option(None, "--output-dir", help="Run directory (checkpoints and log)"),
    architecture: str | None = Option(None, "--architecture", help="mono_source or chained"),
    attention: str | None = Option(None, "--attention", help="global or forced"),
    target_mode: str | None = Option(None, "--target-mode", help="ops or words"),
    cell_size: int | None = Option(None, "--cell-size", help="LSTM cell size"),
    embedding_size: int | None = Option(None, "--embedding-size", help="Embedding size"),
    vocab_limit: int | None = Option(None, "--vocab-limit", help="Maximum vocab size"),
    dropout: float | None = Option(None, "--dropout", help="Dropout probability"),
    preset: str | None = Option(None, "--preset", help="Learning rate schedule: real or synthetic"),
    batch_size: int | None = Option(None, "--batch-size", help="Batch size"),
    lr: float | None = Option(None, "--lr", help="Initial learning rate"),
    max_steps: int | None = Option(None, "--max-steps", help="Maximum number of updates"),
    eval_every: int | None = Option(None, "--eval-every", help="Updates between dev evaluations"),
    patience: int | None = Option(None, "--patience", help="Evaluations without improvement before stopping"),
    clip_norm: float | None = Option(None, "--clip-norm", help="Gradient norm clipping"),
    seed: int | None = SeedOption,
    threads: int = ThreadsOption,
):
    values = start_run(
        "train",
        {
            "data.src": src,
            "data.mt": mt,
            "data.pe": pe,
            "data.dev_src": dev_src,
            "data.dev_mt": dev_mt,
            "data.dev_pe": dev_pe,
            "data.dev_size": dev_size,
            "data.synthetic": synthetic,
            "data.oversample": oversample,
            "output_dir": output_dir,
            "model.architecture": architecture,
            "model.attention_mode": attention,
            "model.target_mode": target_mode,
            "model.cell_size": cell_size,
            "model.embedding_size": embedding_size,
            "model.vocab_limit": vocab_limit,
            "model.dropout_p": dropout,
            "train.preset": preset,
            "train.batch_size": batch_size,
            "train.initial_lr": lr,
            "train.max_steps": max_steps,
            "train.eval_every_steps": eval_every,
            "train.patience": patience,
            "train.clip_norm": clip_norm,
            "seed": seed,
            "threads": threads,
        },
        config_file,
    )
    _seed = int(values["seed"])
    model_config = ModelConfig.from_dict({**section(values, "model"), "seed": _seed})
    train_values = {**section(values, "train"), "seed": _seed}
    _preset = train_values.pop("preset", None)
    train_config = TrainConfig.preset(_preset, **train_values) if _preset else TrainConfig.from_dict(train_values)

    corpus, dev = load_training_data(section(values, "data"), model_config, _seed)
    model = create_model(model_config, build_vocabs(corpus, model_config))
    _output_dir = Path(values.get("output_dir") or env.OUTPUT_DIR / model_config.name)
    state = train(model, corpus, dev, train_config, output_dir=_output_dir, threads=int(values["threads"]))
    _best = f"{state.best_ter:.2f}" if state.best_ter is not None else "n/a"
    sys.stdout.write(
        f"steps {state.step} stop {state.stop_reason} best_dev_ter {_best} best_step {state.best_step} "
        f"checkpoint {state.best_checkpoint}\n"
    )


@cli.command("grad-check", help="Finite-difference gradient check of tiny models in float64")
def run_grad_check(
    architecture: str | None = Option(None, "--architecture", help="mono_source or chained (all models by default)"),
    attention: str = Option("forced", "--attention", help="global or forced"),
    target_mode: str = Option("ops", "--target-mode", help="ops or words"),
    cell_size: int = Option(3, "--cell-size", help="LSTM cell size"),
    tolerance: float = Option(1e-4, "--tolerance", help="Maximum relative error"),
    max_entries: int = Option(200, "--max-entries", help="Sampled entries per parameter"),
    seed: int | None = SeedOption,
):
    values = start_run(
        "grad-check",
        {
            "architecture": architecture,
            "attention": attention,
            "target_mode": target_mode,
            "cell_size": cell_size,
            "tolerance": tolerance,
            "max_entries": max_entries,
            "seed": seed,
        },
    )
    models = GRAD_CHECK_MODELS if architecture is None else ((architecture, attention, target_mode),)
    failed = []
    for _arch, _attention, _target in models:
        # Validates the combination before building anything
        ModelConfig.from_dict({"architecture": _arch, "attention_mode": _attention, "target_mode": _target})
        report = toy_grad_check(
            _arch,  # type: ignore[arg-type]
            _attention,  # type: ignore[arg-type]
            _target,  # type: ignore[arg-type]
            cell_size=cell_size,
            seed=int(values["seed"]),
            max_entries=max_entries,
        )
        _name = f"{_arch}-{_attention}-{_target}"
        _status = "ok" if report.passed(tolerance) else "FAILED"
        sys.stdout.write(f"{_name}\t{report.max_error:.3e}\t{report.checked_entries}\t{_status}\n")
        for param, error in report.worst(3):
            logs.info(f"{_name}: {param} max relative error {error:.3e}")
        if not report.passed(tolerance):
            failed.append(_name)
    if failed:
        raise NumericalError(f"Gradient check above {tolerance:g} for {', '.join(failed)}")
