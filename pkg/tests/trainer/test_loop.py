import numpy as np
import pytest

from apedit.editops import KEEP
from apedit.errors import EmptyCorpus, TrainingAborted
from apedit.infer import decode_ops
from apedit.model import ModelConfig, create_model, load_checkpoint
from apedit.numcore import float64_mode
from apedit.trainer import BEST_CHECKPOINT, LAST_CHECKPOINT, LOG_COLUMNS, TrainConfig, build_vocabs, evaluate, train

from ..data import gen_edit_corpus, gen_identity_corpus


def _model(triples, **kwargs):
    config = ModelConfig(**{"cell_size": 8, "embedding_size": 8, "vocab_limit": 40, "dropout_p": 0.0, **kwargs})
    return create_model(config, build_vocabs(triples, config))


def _read_tsv(path) -> list[dict[str, str]]:
    header, *rows = path.read_text().splitlines()
    assert tuple(header.split("\t")) == LOG_COLUMNS
    return [dict(zip(LOG_COLUMNS, row.split("\t"))) for row in rows]


def test_short_run(tmp_path):
    corpus, dev = gen_identity_corpus(40), gen_identity_corpus(6)
    model = _model(corpus)
    config = TrainConfig(batch_size=8, eval_every_steps=10, max_steps=30, patience=None, seed=3)
    state = train(model, corpus, dev, config, output_dir=tmp_path)

    assert state.step == 30
    assert state.stop_reason == "max_steps"
    assert state.examples_seen == 30 * 8
    assert np.mean(state.losses[-5:]) < np.mean(state.losses[:5])
    assert [step for step, _ in state.dev_history] == [10, 20, 30]
    assert state.best_ter == min(ter for _, ter in state.dev_history)
    assert (tmp_path / BEST_CHECKPOINT).exists()
    assert (tmp_path / LAST_CHECKPOINT).exists()

    rows = _read_tsv(tmp_path / "train.tsv")
    assert sum(r["kind"] == "step" for r in rows) == 30
    best = [float(r["best_ter"]) for r in rows if r["kind"] == "eval"]
    assert best == sorted(best, reverse=True)
    # Five epochs of 40 examples with batches of 8, decayed once per epoch
    assert float(rows[0]["lr"]) == 1.0
    assert float(rows[-2]["lr"]) == pytest.approx(0.8**5)


def test_best_checkpoint_matches_best_eval(tmp_path):
    corpus, dev = gen_edit_corpus(24), gen_edit_corpus(4)
    config = TrainConfig(batch_size=8, eval_every_steps=3, max_steps=9, patience=None, seed=1)
    state = train(_model(corpus), corpus, dev, config, output_dir=tmp_path)
    best = load_checkpoint(tmp_path / BEST_CHECKPOINT)
    assert evaluate(best, dev) == pytest.approx(state.best_ter)


def test_train_without_dev():
    corpus = gen_identity_corpus(10)
    state = train(_model(corpus), corpus, [], TrainConfig(batch_size=4, max_steps=3))
    assert state.step == 3
    assert state.best_ter is None
    assert state.dev_history == []


def _assert_loss_sums(state):
    assert len(state.loss_terms) == state.step
    for total, (translate, ape) in zip(state.losses, state.loss_terms):
        assert translate is not None
        assert abs(total - (translate + ape)) <= 1e-9


def test_train_chained():
    corpus = gen_edit_corpus(8)
    with float64_mode():
        model = _model(corpus, architecture="chained")
        state = train(model, corpus, corpus[:2], TrainConfig(batch_size=4, eval_every_steps=2, max_steps=6))
    assert state.step == 6
    assert len(state.dev_history) == 3
    _assert_loss_sums(state)


def test_mono_loss_terms():
    corpus = gen_identity_corpus(8)
    state = train(_model(corpus), corpus, [], TrainConfig(batch_size=4, max_steps=2))
    assert [translate for translate, _ in state.loss_terms] == [None, None]
    assert [ape for _, ape in state.loss_terms] == state.losses


def test_numerical_error_aborts():
    corpus = gen_identity_corpus(8)
    model = _model(corpus)
    model.input_embedding.table.value[:] = np.inf
    with pytest.raises(TrainingAborted) as e:
        train(model, corpus, [], TrainConfig(batch_size=4, max_steps=3))
    assert e.value.step == 1


def test_empty_corpus():
    corpus = gen_identity_corpus(4)
    with pytest.raises(EmptyCorpus):
        train(_model(corpus), [], [], TrainConfig())
    with pytest.raises(EmptyCorpus):
        evaluate(_model(corpus), [])


@pytest.mark.slow
def test_learns_identity(tmp_path):
    corpus, dev = gen_identity_corpus(200), gen_identity_corpus(20)
    model = _model(corpus)
    config = TrainConfig(batch_size=16, eval_every_steps=50, max_steps=400, patience=None, seed=0)
    state = train(model, corpus, dev, config, output_dir=tmp_path)
    assert state.best_ter == 0.0
    best = load_checkpoint(tmp_path / BEST_CHECKPOINT)
    scripts = [decode_ops(best, None, t.mt) for t in dev]
    all_keep = sum(all(op == KEEP for op in s[:-1]) for s in scripts)
    assert all_keep / len(scripts) >= 0.99


OVERFIT_CONFIG = {
    "batch_size": 16,
    "initial_lr": 1.0,
    "decay_factor": 1.0,
    "eval_every_steps": 250,
    "max_steps": 5000,
    "patience": 4,
    "clip_norm": 5.0,
    "seed": 0,
}


@pytest.mark.slow
def test_mono_forced_overfits_edit_corpus():
    corpus = gen_edit_corpus(64)
    model = _model(corpus, cell_size=16, embedding_size=16)
    state = train(model, corpus, corpus, TrainConfig.from_dict(OVERFIT_CONFIG))
    assert state.step <= 5000
    assert state.best_ter < 1.0


@pytest.mark.slow
def test_chained_overfits_edit_corpus():
    corpus = gen_edit_corpus(64)
    with float64_mode():
        model = _model(corpus, architecture="chained", cell_size=16, embedding_size=16)
        state = train(model, corpus, corpus, TrainConfig.from_dict(OVERFIT_CONFIG))
    assert state.step <= 5000
    assert state.best_ter < 1.0
    _assert_loss_sums(state)
