import sys
from pathlib import Path

from piou import Option

from apedit.datapipe import build_word_vocab, load_parallel, read_lines
from apedit.editops import apply_ops, build_op_vocab, extract_ops, format_script, read_scripts, script_stats
from apedit.errors import LineCountMismatch
from apedit.logs import logs
from apedit.cli.app import SeedOption, cli, start_run, write_output

__all__ = ("run_extract_ops", "run_apply_ops", "run_stats", "run_build_vocab")


@cli.command("extract-ops", help="Extract the KEEP/DEL/INS script turning each MT line into its PE line")
def run_extract_ops(
    mt: Path = Option(..., "--mt", help="MT file, one tokenized sentence per line"),
    pe: Path = Option(..., "--pe", help="Post-edited file, line-aligned with --mt"),
    out: Path | None = Option(None, "--out", help="Output script file (stdout by default)"),
    seed: int | None = SeedOption,
):
    start_run("extract-ops", {"mt": mt, "pe": pe, "out": out, "seed": seed})
    rows = load_parallel([mt, pe])
    write_output(out, (format_script(extract_ops(_mt, _pe)) for _mt, _pe in rows))
    logs.info(f"Extracted {len(rows)} scripts")


@cli.command("apply-ops", help="Replay edit scripts on MT lines")
def run_apply_ops(
    mt: Path = Option(..., "--mt", help="MT file"),
    ops: Path = Option(..., "--ops", help="Script file, line-aligned with --mt"),
    out: Path | None = Option(None, "--out", help="Output file (stdout by default)"),
    unk_placeholder: str | None = Option(None, "--unk", help="Replacement of inserted unknown words"),
    seed: int | None = SeedOption,
):
    start_run("apply-ops", {"mt": mt, "ops": ops, "out": out, "unk": unk_placeholder, "seed": seed})
    mt_lines = read_lines(mt)
    scripts = read_scripts(ops)
    if len(mt_lines) != len(scripts):
        raise LineCountMismatch([str(mt), str(ops)], [len(mt_lines), len(scripts)])
    write_output(out, (apply_ops(_mt, s, unk_placeholder=unk_placeholder) for _mt, s in zip(mt_lines, scripts)))


@cli.command("stats", help="Distribution of edit ops in a script file")
def run_stats(
    ops: Path = Option(..., "--ops", help="Script file"),
    top: int = Option(8, "--top", help="Number of ops to list"),
    seed: int | None = SeedOption,
):
    start_run("stats", {"ops": ops, "top": top, "seed": seed})
    if top < 1:
        raise ValueError(f"--top must be >= 1, got {top}")
    stats = script_stats(read_scripts(ops))
    sys.stdout.write(f"Total ops: {stats.total}\n{stats.format(top)}\n")


@cli.command("build-vocab", help="Build a word vocabulary, or an op vocabulary with --ops")
def run_build_vocab(
    inputs: list[Path] = Option(..., "--input", help="Tokenized text files (or script files with --ops)"),
    out: Path = Option(..., "--out", help="Output vocab file"),
    limit: int = Option(30_000, "--limit", help="Maximum vocab size, reserved symbols included"),
    ops: bool = Option(False, "--ops", help="Inputs are script files"),
    seed: int | None = SeedOption,
):
    start_run("build-vocab", {"input": inputs, "out": out, "limit": limit, "ops": ops, "seed": seed})
    if ops:
        vocab = build_op_vocab((s for path in inputs for s in read_scripts(path)), limit)
    else:
        vocab = build_word_vocab((line for path in inputs for line in read_lines(path)), limit)
    vocab.save(out)
    logs.info(f"Saved {vocab.kind} vocab of {len(vocab)} symbols to {str(out)!r}")
