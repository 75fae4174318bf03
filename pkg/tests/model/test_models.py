import numpy as np
import pytest

from apedit.errors import InvalidTarget, VocabMismatch
from apedit.model import ChainedModel, ModelConfig, create_model
from apedit.model.batch import Batch, Example
from apedit.model.toy import toy_batch, toy_grad_check, toy_model, toy_vocabs
from apedit.numcore import float64_mode


@pytest.mark.parametrize(
    "architecture,attention_mode,target_mode",
    [
        pytest.param("mono_source", "global", "ops", id="mono-global-ops"),
        pytest.param("mono_source", "forced", "ops", id="mono-forced-ops"),
        pytest.param("mono_source", "global", "words", id="mono-global-words"),
        pytest.param("chained", "forced", "ops", id="chained-forced-ops"),
    ],
)
def test_full_model_gradients(architecture, attention_mode, target_mode):
    report = toy_grad_check(architecture, attention_mode, target_mode)
    assert report.checked_entries > 0
    assert report.passed(1e-4), report.worst()


def test_chained_shares_mt_embedding():
    model = toy_model("chained")
    assert isinstance(model, ChainedModel)
    assert model.translate_decoder.embedding is model.mt_embedding
    assert model.store.names.count("mt_embedding.table") == 1
    assert not any(name.startswith("translate_decoder.embedding") for name in model.store.names)


def test_chained_loss_is_sum():
    model = toy_model("chained")
    terms = model.loss(toy_batch(model))
    assert terms.translate is not None
    assert terms.total.item() == pytest.approx(terms.translate.item() + terms.ape.item(), rel=1e-6)


def test_mono_loss_terms():
    model = toy_model("mono_source", "global")
    terms = model.loss(toy_batch(model))
    assert terms.translate is None
    assert terms.total is terms.ape
    assert terms.total.item() > 0


def _row(batch: Batch, i: int) -> Batch:
    return Batch(
        inp=batch.inp[i : i + 1],
        inp_lengths=batch.inp_lengths[i : i + 1],
        trg_in=batch.trg_in[i : i + 1],
        trg_out=batch.trg_out[i : i + 1],
        trg_lengths=batch.trg_lengths[i : i + 1],
    )


@pytest.mark.parametrize("attention_mode", ["global", "forced"])
def test_loss_is_token_weighted_mean(attention_mode):
    with float64_mode():
        model = toy_model("mono_source", attention_mode)
        batch = toy_batch(model)
        total = model.loss(batch).total.item()
        per_row = [model.loss(_row(batch, i)).total.item() for i in range(batch.size)]
    counts = batch.trg_lengths
    assert counts[0] != counts[1]
    assert total == pytest.approx(float(np.dot(per_row, counts) / counts.sum()), rel=1e-9)


def test_dropout_is_seeded():
    model = toy_model("mono_source", "forced")
    model.config.dropout_p = 0.3
    batch = toy_batch(model)
    first = model.loss(batch, train=True, rng=np.random.default_rng(5)).total.item()
    second = model.loss(batch, train=True, rng=np.random.default_rng(5)).total.item()
    assert first == second
    assert model.loss(batch).total.item() != first


def test_start_symbol():
    ops_model = toy_model("mono_source", "forced", "ops")
    assert ops_model.start_id == ops_model.target_vocab.id("EOS") == ops_model.target_vocab.eos_id
    words_model = toy_model("mono_source", "global", "words")
    assert words_model.start_id == words_model.target_vocab.bos_id != words_model.target_vocab.eos_id
    assert words_model.consuming_ids == ()


def test_check_batch_target_end():
    model = toy_model()
    batch = toy_batch(model)
    batch.trg_out[0, batch.trg_lengths[0] - 1] = model.target_vocab.id("KEEP")
    with pytest.raises(InvalidTarget):
        model.loss(batch)


def test_check_batch_vocab():
    model = toy_model()
    batch = toy_batch(model)
    batch.inp[0, 0] = len(model.input_vocab) + 3
    with pytest.raises(VocabMismatch):
        model.loss(batch)


def test_chained_needs_source():
    model = toy_model("chained")
    batch = model.collate([Example(inp=[4, 5], target=[model.target_vocab.eos_id])])
    with pytest.raises(InvalidTarget):
        model.loss(batch)


def test_collate_empty_target():
    model = toy_model()
    with pytest.raises(InvalidTarget):
        model.collate([Example(inp=[4], target=[])])


@pytest.mark.parametrize(
    "values",
    [
        pytest.param({"cell_size": 0}, id="cell-size"),
        pytest.param({"dropout_p": 1.0}, id="dropout"),
        pytest.param({"attention_mode": "forced", "target_mode": "words"}, id="forced-words"),
        pytest.param({"architecture": "chained", "attention_mode": "global"}, id="chained-global"),
        pytest.param({"attention_mode": "soft"}, id="unknown-attention"),
    ],
)
def test_model_config_errors(values):
    with pytest.raises(ValueError):
        ModelConfig.from_dict(values)


def test_model_config_name():
    assert ModelConfig().name == "mono_source-forced-ops"
    assert ModelConfig.from_dict({"cell_size": "16"}).cell_size == 16


def test_create_model_errors():
    config = ModelConfig(cell_size=3, embedding_size=3)
    with pytest.raises(ValueError):
        create_model(config, {**toy_vocabs(), "extra": toy_vocabs()["input"]})
    with pytest.raises(ValueError):
        create_model(config, toy_vocabs("words"))
    with pytest.raises(ValueError):
        create_model(ModelConfig(cell_size=3, embedding_size=3, architecture="chained"), toy_vocabs())
