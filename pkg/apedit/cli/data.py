from pathlib import Path

from piou import Option

from apedit.cli.app import ConfigOption, ProgressOption, SeedOption, ThreadsOption, cli, start_run, write_output
from apedit.datapipe import (
    FilterRules,
    LmConfig,
    coarse_filter,
    gen_synthetic,
    lm_load,
    lm_save,
    lm_select,
    lm_train,
    load_triples,
    read_lines,
    split_dev,
    ter_filter,
    write_triples,
)
from apedit.datapipe.synthetic import DEFAULT_SUBSET_SIZE
from apedit.errors import WrongMode
from apedit.infer import DEFAULT_MAX_LEN
from apedit.logs import logs
from apedit.model import load_checkpoint
from apedit.utils import section

__all__ = (
    "run_lm_train",
    "run_lm_select",
    "run_coarse_filter",
    "run_gen_synthetic",
    "run_filter_ter",
    "run_split_dev",
)


@cli.command("lm-train", help="Train an interpolated trigram language model")
def run_lm_train(
    text: Path = Option(..., "--text", help="Tokenized in-domain text"),
    out: Path = Option(..., "--out", help="Output model file"),
    alpha: float | None = Option(None, "--alpha", help="Add-alpha smoothing constant"),
    config_file: Path | None = ConfigOption,
    seed: int | None = SeedOption,
):
    values = start_run("lm-train", {"text": text, "out": out, "lm.alpha": alpha, "seed": seed}, config_file)
    lm = lm_train(read_lines(text), LmConfig.from_dict(section(values, "lm")))
    lm_save(lm, out)


@cli.command("lm-select", help="Keep the sentences best scored by a language model")
def run_lm_select(
    lm_path: Path = Option(..., "--lm", help="Language model file"),
    text: Path = Option(..., "--text", help="Candidate sentences"),
    top_k: int = Option(..., "--top", help="Number of sentences to keep"),
    out: Path | None = Option(None, "--out", help="Output file (stdout by default)"),
    seed: int | None = SeedOption,
    show_progress: bool = ProgressOption,
):
    start_run("lm-select", {"lm": lm_path, "text": text, "top": top_k, "out": out, "seed": seed})
    selected = lm_select(lm_load(lm_path), read_lines(text), top_k, show_progress=show_progress)
    write_output(out, selected)


@cli.command("coarse-filter", help="Drop malformed lines from a monolingual corpus")
def run_coarse_filter(
    text: Path = Option(..., "--text", help="Raw text file"),
    out: Path | None = Option(None, "--out", help="Output file (stdout by default)"),
    min_tokens: int | None = Option(None, "--min-tokens", help="Minimum number of tokens"),
    max_tokens: int | None = Option(None, "--max-tokens", help="Maximum number of tokens"),
    min_alpha_ratio: float | None = Option(None, "--min-alpha", help="Minimum share of letters and punctuation"),
    keep_uppercase: bool = Option(False, "--keep-uppercase", help="Keep all-uppercase lines"),
    config_file: Path | None = ConfigOption,
    seed: int | None = SeedOption,
):
    values = start_run(
        "coarse-filter",
        {
            "text": text,
            "out": out,
            "filter.min_tokens": min_tokens,
            "filter.max_tokens": max_tokens,
            "filter.min_alpha_ratio": min_alpha_ratio,
            "filter.check_uppercase": False if keep_uppercase else None,
            "seed": seed,
        },
        config_file,
    )
    rules = FilterRules.from_dict(section(values, "filter"))
    with text.open(encoding="utf-8") as f:
        kept = list(coarse_filter(f, rules))
    write_output(out, kept)


@cli.command("gen-synthetic", help="Back-generate SRC and MT sides of PE lines with two words-mode models")
def run_gen_synthetic(
    pe: Path = Option(..., "--pe", help="Monolingual post-edit style text"),
    pe2src: Path = Option(..., "--pe2src", help="Checkpoint of the PE->SRC model"),
    pe2mt: Path = Option(..., "--pe2mt", help="Checkpoint of the PE->MT model"),
    out: Path = Option(..., "--out", help="Output prefix (.src/.mt/.pe)"),
    max_len: int = Option(DEFAULT_MAX_LEN, "--max-len", help="Maximum generated length"),
    seed: int | None = SeedOption,
    show_progress: bool = ProgressOption,
):
    start_run(
        "gen-synthetic",
        {"pe": pe, "pe2src": pe2src, "pe2mt": pe2mt, "out": out, "max_len": max_len, "seed": seed},
    )
    models = [load_checkpoint(pe2src), load_checkpoint(pe2mt)]
    for path, model in zip((pe2src, pe2mt), models):
        if model.config.target_mode != "words":
            raise WrongMode(f"{str(path)!r} is not a words-mode model")
    triples = gen_synthetic(read_lines(pe), *models, max_len=max_len, show_progress=show_progress)
    write_triples(out, triples)


@cli.command("filter-ter", help="Select synthetic triples whose TER statistics follow a real corpus")
def run_filter_ter(
    real: Path = Option(..., "--real", help="Prefix of the real corpus (.mt/.pe)"),
    synthetic: Path = Option(..., "--synthetic", help="Prefix of the synthetic corpus (.src/.mt/.pe)"),
    size: int = Option(..., "--size", help="Number of triples to select"),
    out: Path = Option(..., "--out", help="Output prefix (.src/.mt/.pe)"),
    subset_size: int = Option(DEFAULT_SUBSET_SIZE, "--subset", help="Candidates drawn per selection"),
    no_shifts: bool = Option(False, "--no-shifts", help="TER statistics without block shifts"),
    seed: int | None = SeedOption,
    threads: int = ThreadsOption,
    show_progress: bool = ProgressOption,
):
    values = start_run(
        "filter-ter",
        {
            "real": real,
            "synthetic": synthetic,
            "size": size,
            "out": out,
            "subset": subset_size,
            "no_shifts": no_shifts,
            "seed": seed,
            "threads": threads,
        },
    )
    real_triples = load_triples(None, real.with_name(f"{real.name}.mt"), real.with_name(f"{real.name}.pe"))
    pool = load_triples(*(synthetic.with_name(f"{synthetic.name}.{side}") for side in ("src", "mt", "pe")))
    selected = ter_filter(
        real_triples,
        pool,
        size,
        subset_size,
        int(values["seed"]),
        use_shifts=not no_shifts,
        threads=threads,
        show_progress=show_progress,
    )
    write_triples(out, selected)


@cli.command("split-dev", help="Hold out a random dev set from a line-aligned corpus")
def run_split_dev(
    prefix: Path = Option(..., "--corpus", help="Corpus prefix (.src/.mt/.pe)"),
    size: int = Option(..., "--size", help="Number of held-out triples"),
    train_out: Path = Option(..., "--train-out", help="Output prefix of the remaining triples"),
    dev_out: Path = Option(..., "--dev-out", help="Output prefix of the held-out triples"),
    no_src: bool = Option(False, "--no-src", help="The corpus has no .src file"),
    seed: int | None = SeedOption,
):
    values = start_run(
        "split-dev",
        {"corpus": prefix, "size": size, "train_out": train_out, "dev_out": dev_out, "no_src": no_src, "seed": seed},
    )
    _src = None if no_src else prefix.with_name(f"{prefix.name}.src")
    triples = load_triples(_src, prefix.with_name(f"{prefix.name}.mt"), prefix.with_name(f"{prefix.name}.pe"))
    train, dev = split_dev(triples, size, int(values["seed"]))
    write_triples(train_out, train)
    write_triples(dev_out, dev)
    logs.info(f"Split {len(triples)} triples into {len(train)} train and {len(dev)} dev")
