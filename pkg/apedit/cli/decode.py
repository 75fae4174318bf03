import sys
from pathlib import Path

import numpy as np
from piou import Option

from apedit.cli.app import ProgressOption, SeedOption, ThreadsOption, cli, start_run, write_output
from apedit.datapipe import load_parallel, read_lines
from apedit.editops import format_script
from apedit.errors import EmptyCorpus, MissingSource
from apedit.infer import DEFAULT_MAX_EXTRA, DEFAULT_MAX_LEN, decode_corpus, decode_words
from apedit.logs import logs
from apedit.metrics import bleu_corpus, ter_corpus_stats, ter_from_stats, ter_stats_tsv
from apedit.model import load_checkpoint

__all__ = ("run_decode", "run_eval", "format_scores")


@cli.command("decode", help="Post-edit MT lines with a trained model")
def run_decode(
    model_path: Path = Option(..., "--model", help="Checkpoint file"),
    mt: Path = Option(..., "--mt", help="MT file (input file of a words-mode model)"),
    src: Path | None = Option(None, "--src", help="Source file, needed by chained models"),
    out: Path | None = Option(None, "--out", help="Post-edited output (stdout by default)"),
    ops_out: Path | None = Option(None, "--ops-out", help="Decoded edit scripts"),
    align_out: Path | None = Option(None, "--align-out", help="Alignment matrices (.npz, one array per line)"),
    max_extra: int = Option(DEFAULT_MAX_EXTRA, "--max-extra", help="Ops allowed beyond the MT length"),
    max_len: int = Option(DEFAULT_MAX_LEN, "--max-len", help="Maximum output length in words mode"),
    unk_placeholder: str | None = Option(None, "--unk", help="Replacement of inserted unknown words"),
    seed: int | None = SeedOption,
    threads: int = ThreadsOption,
    show_progress: bool = ProgressOption,
):
    start_run(
        "decode",
        {
            "model": model_path,
            "mt": mt,
            "src": src,
            "out": out,
            "ops_out": ops_out,
            "align_out": align_out,
            "max_extra": max_extra,
            "max_len": max_len,
            "unk": unk_placeholder,
            "seed": seed,
            "threads": threads,
        },
    )
    model = load_checkpoint(model_path)

    if model.config.target_mode == "words":
        if ops_out is not None or align_out is not None:
            raise ValueError("--ops-out and --align-out need a model trained on ops")
        write_output(out, (decode_words(model, line, max_len) if line else [] for line in read_lines(mt)))
        return

    if model.needs_source:
        if src is None:
            raise MissingSource(f"Model {model.config.name!r} needs --src")
        inputs = [(s, m) for s, m in load_parallel([src, mt])]
    else:
        inputs = [(None, m) for m in read_lines(mt)]
    results = decode_corpus(
        model,
        inputs,
        max_extra=max_extra,
        unk_placeholder=unk_placeholder,
        threads=threads,
        show_progress=show_progress,
    )
    write_output(out, (r.output for r in results))
    if ops_out is not None:
        write_output(ops_out, (format_script(r.script) for r in results))
    if align_out is not None:
        _empty = np.zeros((0, 0))
        np.savez_compressed(
            align_out,
            **{f"line_{i + 1}": r.alignment if r.alignment is not None else _empty for i, r in enumerate(results)},
        )
    if nb_errors := sum(1 for r in results if r.error is not None):
        logs.warning(f"{nb_errors} of {len(results)} lines left unedited")


def format_scores(ter: float, bleu: float) -> str:
    return f"TER {ter:.2f} BLEU {bleu:.2f}"


@cli.command("eval", help="Corpus TER and BLEU of hypotheses against references")
def run_eval(
    hyp: Path = Option(..., "--hyp", help="Hypothesis file"),
    ref: Path = Option(..., "--ref", help="Reference file"),
    mt: Path | None = Option(None, "--mt", help="MT file, scored as the do-nothing baseline"),
    no_shifts: bool = Option(False, "--no-shifts", help="TER without block shifts"),
    tsv: Path | None = Option(None, "--tsv", help="Per-sentence TER statistics"),
    seed: int | None = SeedOption,
    threads: int = ThreadsOption,
):
    start_run(
        "eval",
        {"hyp": hyp, "ref": ref, "mt": mt, "no_shifts": no_shifts, "tsv": tsv, "seed": seed, "threads": threads},
    )
    paths = [hyp, ref] if mt is None else [hyp, ref, mt]
    rows = load_parallel(paths)
    if not rows:
        raise EmptyCorpus(f"No line in {str(hyp)!r}")

    def _scores(pairs) -> tuple[str, list]:
        stats = ter_corpus_stats(pairs, use_shifts=not no_shifts, threads=threads)
        return format_scores(ter_from_stats(stats), bleu_corpus(pairs).score), stats

    line, stats = _scores([(row[0], row[1]) for row in rows])
    sys.stdout.write(line + "\n")
    if mt is not None:
        baseline, _ = _scores([(row[2], row[1]) for row in rows])
        sys.stdout.write(f"baseline {baseline}\n")
    if tsv is not None:
        tsv.write_text(ter_stats_tsv(stats), encoding="utf-8")
