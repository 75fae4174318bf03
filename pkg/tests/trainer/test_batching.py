import pytest

from apedit.datapipe import Triple
from apedit.errors import EmptyCorpus
from apedit.model import ModelConfig, create_model
from apedit.trainer import build_vocabs, encode_examples, make_batches, oversample_concat, target_symbols

from ..data import gen_edit_corpus


def test_batch_sizes():
    batches = list(make_batches(list(range(65)), 32, seed=1, epoch=0, collate=list))
    assert [len(b) for b in batches] == [32, 32, 1]
    assert sorted(x for b in batches for x in b) == list(range(65))


def test_batch_order_is_seeded():
    def _order(seed, epoch):
        return [x for b in make_batches(list(range(50)), 8, seed, epoch, collate=list) for x in b]

    assert _order(3, 0) == _order(3, 0)
    assert _order(3, 0) != _order(3, 1)
    assert _order(3, 0) != _order(4, 0)


def test_batch_errors():
    with pytest.raises(EmptyCorpus):
        list(make_batches([], 4, 0, 0, collate=list))
    with pytest.raises(ValueError):
        list(make_batches([1], 0, 0, 0, collate=list))


def test_oversample_concat():
    assert len(oversample_concat(range(500_000), range(12_000), 20)) == 740_000
    assert oversample_concat(["a"], ["b", "c"], 1) == ["a", "b", "c"]
    assert oversample_concat([], ["b"], 3) == ["b", "b", "b"]
    with pytest.raises(ValueError):
        oversample_concat(["a"], ["b"], 0)


def test_build_vocabs():
    triples = gen_edit_corpus(30)
    ops_vocabs = build_vocabs(triples, ModelConfig(vocab_limit=50))
    assert set(ops_vocabs) == {"input", "target"}
    assert ops_vocabs["target"].kind == "ops"
    assert "INS|." in ops_vocabs["target"]

    chained = build_vocabs(triples, ModelConfig(vocab_limit=50, architecture="chained"))
    assert set(chained) == {"src", "input", "target"}

    words = build_vocabs(triples, ModelConfig(vocab_limit=50, attention_mode="global", target_mode="words"))
    assert words["target"].kind == "words"
    with pytest.raises(EmptyCorpus):
        build_vocabs([], ModelConfig())


def test_target_symbols():
    triple = Triple(src=[], mt=["the", "cat"], pe=["the", "cats", "."])
    assert target_symbols(triple, ModelConfig()) == ["KEEP", "DEL", "INS|cats", "INS|."]
    assert target_symbols(triple, ModelConfig(attention_mode="global", target_mode="words")) == ["the", "cats", "."]


def test_encode_examples_skips_unusable():
    triples = gen_edit_corpus(5)
    config = ModelConfig(cell_size=4, embedding_size=4, vocab_limit=50, architecture="chained")
    model = create_model(config, build_vocabs(triples, config))
    broken = [Triple(src=[], mt=["the"], pe=["the"]), Triple(src=["a"], mt=[], pe=["b"])]
    examples = encode_examples([*triples, *broken], model)
    assert len(examples) == 5
    assert all(e.target[-1] == model.target_vocab.eos_id for e in examples)
    assert all(e.src for e in examples)
