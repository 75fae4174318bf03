import json

import numpy as np
import pytest

from apedit.cli import main
from apedit.datapipe import load_triples

from ..data import gen_edit_corpus, gen_identity_corpus, write_corpus


def _run(capsys, *args: str) -> tuple[int, str, str]:
    code = main([str(a) for a in args])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def corpus(tmp_path):
    return write_corpus(tmp_path, "train", gen_edit_corpus(20))


def test_extract_apply_round_trip(tmp_path, capsys, corpus):
    ops = tmp_path / "train.ops"
    code, _, err = _run(capsys, "extract-ops", "--mt", f"{corpus}.mt", "--pe", f"{corpus}.pe", "--out", ops)
    assert code == 0
    config = json.loads(err.splitlines()[0])
    assert config["command"] == "extract-ops"
    assert config["seed"] == 1234

    code, out, _ = _run(capsys, "apply-ops", "--mt", f"{corpus}.mt", "--ops", ops)
    assert code == 0
    assert out == (tmp_path / "train.pe").read_text()


def test_stats(tmp_path, capsys):
    ops = tmp_path / "ops.txt"
    ops.write_text("KEEP KEEP DEL\nINS|a KEEP\n")
    code, out, _ = _run(capsys, "stats", "--ops", ops, "--top", "2")
    assert code == 0
    assert out.splitlines() == ["Total ops: 5", "Token\tCount\tPercentage", "KEEP\t3\t60.0%", "DEL\t1\t20.0%"]


def test_eval(tmp_path, capsys):
    (tmp_path / "hyp.txt").write_text("the cat is grey .\na b c\n")
    (tmp_path / "ref.txt").write_text("the cat is grey .\na b c\n")
    (tmp_path / "mt.txt").write_text("the cats is grey\na b c\n")
    tsv = tmp_path / "ter.tsv"
    code, out, _ = _run(
        capsys, "eval", "--hyp", tmp_path / "hyp.txt", "--ref", tmp_path / "ref.txt", "--mt", tmp_path / "mt.txt", "--tsv", tsv
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "TER 0.00 BLEU 100.00"
    assert lines[1].startswith("baseline TER 25.00 ")
    assert len(tsv.read_text().splitlines()) == 3


def test_data_error_exit_code(tmp_path, capsys):
    (tmp_path / "mt.txt").write_text("a b\nc\n")
    (tmp_path / "ops.txt").write_text("KEEP\n")
    code, _, err = _run(capsys, "apply-ops", "--mt", tmp_path / "mt.txt", "--ops", tmp_path / "ops.txt")
    assert code == 1
    assert err.splitlines()[-1].startswith("error: LineCountMismatch: ")

    code, _, _ = _run(capsys, "extract-ops", "--mt", tmp_path / "missing.txt", "--pe", tmp_path / "mt.txt")
    assert code == 1


def test_usage_error_exit_code(tmp_path, capsys):
    (tmp_path / "ops.txt").write_text("KEEP\n")
    code, _, err = _run(capsys, "stats", "--ops", tmp_path / "ops.txt", "--top", "0")
    assert code == 2
    assert err.splitlines()[-1].startswith("error: ValueError: ")


def test_bad_grad_check_combination(capsys):
    code, _, _ = _run(capsys, "grad-check", "--architecture", "chained", "--attention", "global")
    assert code == 2


def test_grad_check(capsys):
    code, out, _ = _run(capsys, "grad-check", "--architecture", "mono_source", "--attention", "global")
    assert code == 0
    name, _, entries, status = out.strip().split("\t")
    assert name == "mono_source-global-ops"
    assert int(entries) > 0
    assert status == "ok"


def test_train_and_decode(tmp_path, capsys):
    train_prefix = write_corpus(tmp_path, "train", gen_identity_corpus(24))
    dev_prefix = write_corpus(tmp_path, "dev", gen_identity_corpus(4))
    run_dir = tmp_path / "run"
    config = tmp_path / "run.toml"
    config.write_text(
        f"""
output_dir = "{run_dir}"

[data]
mt = "train.mt"
pe = "train.pe"
dev_mt = "dev.mt"
dev_pe = "dev.pe"

[model]
cell_size = 6
embedding_size = 6
attention_mode = "forced"

[train]
batch_size = 8
max_steps = 6
eval_every_steps = 3
"""
    )
    code, out, err = _run(capsys, "train", "--config", config, "--dropout", "0.0", "--seed", "7")
    assert code == 0, err
    assert out.startswith("steps 6 stop max_steps best_dev_ter ")
    effective = json.loads(err.splitlines()[0])["config"]
    assert effective["data.mt"] == str(train_prefix.with_name("train.mt"))
    assert effective["model.dropout_p"] == 0.0
    assert effective["seed"] == 7
    assert (run_dir / "best.ckpt").exists()

    rows = [line.split("\t") for line in (run_dir / "train.tsv").read_text().splitlines()[1:]]
    best = [float(r[7]) for r in rows if r[0] == "eval"]
    assert len(best) == 2
    assert best[1] <= best[0]

    out_path, ops_path, align_path = tmp_path / "dev.out", tmp_path / "dev.ops", tmp_path / "dev.npz"
    code, _, err = _run(
        capsys,
        "decode",
        "--model",
        run_dir / "best.ckpt",
        "--mt",
        f"{dev_prefix}.mt",
        "--out",
        out_path,
        "--ops-out",
        ops_path,
        "--align-out",
        align_path,
    )
    assert code == 0, err
    assert len(out_path.read_text().splitlines()) == 4
    assert all(line.split()[-1] == "EOS" for line in ops_path.read_text().splitlines())
    with np.load(align_path) as alignments:
        assert sorted(alignments.files) == ["line_1", "line_2", "line_3", "line_4"]


def test_decode_chained_needs_source(tmp_path, capsys, corpus):
    run_dir = tmp_path / "run"
    code, _, err = _run(
        capsys,
        "train",
        "--src",
        f"{corpus}.src",
        "--mt",
        f"{corpus}.mt",
        "--pe",
        f"{corpus}.pe",
        "--architecture",
        "chained",
        "--cell-size",
        "4",
        "--embedding-size",
        "4",
        "--batch-size",
        "10",
        "--max-steps",
        "2",
        "--eval-every",
        "2",
        "--output-dir",
        run_dir,
    )
    assert code == 0, err
    code, _, err = _run(capsys, "decode", "--model", run_dir / "best.ckpt", "--mt", f"{corpus}.mt")
    assert code == 1
    assert "MissingSource" in err


def test_lm_train_and_select(tmp_path, capsys):
    text = tmp_path / "in_domain.txt"
    text.write_text("the cat is grey\nthe dog is big\nthe cat sleeps\n")
    candidates = tmp_path / "candidates.txt"
    candidates.write_text("grey big the\nthe cat is grey\nsleeps is dog\n")
    lm = tmp_path / "lm.txt"
    assert _run(capsys, "lm-train", "--text", text, "--out", lm)[0] == 0
    code, out, _ = _run(capsys, "lm-select", "--lm", lm, "--text", candidates, "--top", "1")
    assert code == 0
    assert out == "the cat is grey\n"


def test_coarse_filter(tmp_path, capsys):
    text = tmp_path / "raw.txt"
    text.write_text("too short\nthe cat is on the mat\nTHE CAT IS ON THE MAT\n")
    code, out, _ = _run(capsys, "coarse-filter", "--text", text)
    assert code == 0
    assert out.splitlines() == ["the cat is on the mat"]
    code, out, _ = _run(capsys, "coarse-filter", "--text", text, "--keep-uppercase", "--min-tokens", "2")
    assert out.splitlines() == ["too short", "the cat is on the mat", "THE CAT IS ON THE MAT"]


def test_split_dev(tmp_path, capsys, corpus):
    code, _, _ = _run(
        capsys, "split-dev", "--corpus", corpus, "--size", "5", "--train-out", tmp_path / "a", "--dev-out", tmp_path / "b"
    )
    assert code == 0
    train = load_triples(tmp_path / "a.src", tmp_path / "a.mt", tmp_path / "a.pe")
    dev = load_triples(tmp_path / "b.src", tmp_path / "b.mt", tmp_path / "b.pe")
    assert (len(train), len(dev)) == (15, 5)


def test_filter_ter(tmp_path, capsys, corpus):
    synthetic = write_corpus(tmp_path, "synthetic", gen_edit_corpus(30))
    out = tmp_path / "selected"
    code, _, err = _run(
        capsys, "filter-ter", "--real", corpus, "--synthetic", synthetic, "--size", "10", "--subset", "5", "--out", out
    )
    assert code == 0, err
    assert len(load_triples(tmp_path / "selected.src", tmp_path / "selected.mt", tmp_path / "selected.pe")) == 10
