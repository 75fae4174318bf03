import pytest

from apedit.cli import main
from apedit.datapipe import write_lines

from ..data import gen_edit_corpus, write_corpus


def _ter(line: str) -> float:
    # "TER x BLEU y" or "baseline TER x BLEU y"
    words = line.split()
    return float(words[words.index("TER") + 1])


def _main(*args) -> int:
    return main([str(a) for a in args])


@pytest.mark.slow
def test_end_to_end(tmp_path, capsys):
    real = write_corpus(tmp_path, "real", gen_edit_corpus(64))
    dev = write_corpus(tmp_path, "dev", gen_edit_corpus(16))
    candidates = tmp_path / "candidates.pe"
    write_lines(candidates, (t.pe for t in gen_edit_corpus(300)))

    # In-domain PE selection
    assert _main("lm-train", "--text", f"{real}.pe", "--out", tmp_path / "lm.txt") == 0
    assert _main("lm-select", "--lm", tmp_path / "lm.txt", "--text", candidates, "--top", 150, "--out", tmp_path / "mono.pe") == 0

    # PE->SRC and PE->MT generators, overfitted on the real triples
    generators = {}
    for side in ("src", "mt"):
        run_dir = tmp_path / f"pe2{side}"
        code = _main(
            "train", "--mt", f"{real}.pe", "--pe", f"{real}.{side}", "--dev-mt", f"{dev}.pe", "--dev-pe", f"{dev}.{side}",
            "--target-mode", "words", "--attention", "global", "--cell-size", 16, "--embedding-size", 16,
            "--dropout", 0.0, "--batch-size", 16, "--max-steps", 800, "--eval-every", 200, "--output-dir", run_dir,
        )  # fmt: skip
        assert code == 0
        generators[side] = run_dir / "best.ckpt"

    synthetic = tmp_path / "synthetic"
    code = _main(
        "gen-synthetic", "--pe", tmp_path / "mono.pe", "--pe2src", generators["src"], "--pe2mt", generators["mt"],
        "--out", synthetic, "--max-len", 10,
    )  # fmt: skip
    assert code == 0
    selected = tmp_path / "selected"
    assert _main("filter-ter", "--real", real, "--synthetic", synthetic, "--size", 60, "--subset", 30, "--out", selected) == 0

    run_dir = tmp_path / "chained"
    code = _main(
        "train", "--src", f"{real}.src", "--mt", f"{real}.mt", "--pe", f"{real}.pe",
        "--dev-src", f"{dev}.src", "--dev-mt", f"{dev}.mt", "--dev-pe", f"{dev}.pe",
        "--synthetic", selected, "--oversample", 2, "--architecture", "chained", "--preset", "synthetic",
        "--cell-size", 16, "--embedding-size", 16, "--dropout", 0.0, "--batch-size", 16, "--max-steps", 1500,
        "--eval-every", 100, "--output-dir", run_dir,
    )  # fmt: skip
    assert code == 0

    out = tmp_path / "dev.out"
    assert _main("decode", "--model", run_dir / "best.ckpt", "--src", f"{dev}.src", "--mt", f"{dev}.mt", "--out", out) == 0
    capsys.readouterr()
    assert _main("eval", "--hyp", out, "--ref", f"{dev}.pe", "--mt", f"{dev}.mt") == 0
    scores, baseline = capsys.readouterr().out.splitlines()
    assert _ter(scores) < _ter(baseline)


def test_ter_parsing():
    assert _ter("TER 12.50 BLEU 70.00") == 12.5
    assert _ter("baseline TER 30.00 BLEU 50.00") == 30.0
