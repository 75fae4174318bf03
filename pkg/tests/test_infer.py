import numpy as np
import pytest

from apedit.editops import DEL, EOS, KEEP, Ins, apply_ops
from apedit.errors import EmptyInput, MissingSource, WrongMode
from apedit.infer import decode_corpus, decode_ops, decode_ops_aligned, decode_words, post_edit, post_edit_corpus
from apedit.model.toy import toy_model

from .data import Fake

MODELS = [
    pytest.param(("mono_source", "global"), id="mono-global"),
    pytest.param(("mono_source", "forced"), id="mono-forced"),
    pytest.param(("chained", "forced"), id="chained"),
]


FUZZ_ALPHABET = ("a", "b", "c", "z")


def _tokens() -> list[str]:
    return [Fake.random_element(FUZZ_ALPHABET) for _ in range(Fake.random_int(1, 5))]


def _check_random_decodes(architecture: str, attention_mode: str, nb_models: int, nb_inputs: int) -> int:
    """Decode random inputs with random-weight models, checking the forced pointer law at every step."""
    decoded = 0
    for seed in range(nb_models):
        model = toy_model(architecture, attention_mode, init_scale=1.5, seed=seed)  # type: ignore[arg-type]
        for _ in range(nb_inputs):
            mt, src = _tokens(), _tokens()
            script, alignment = decode_ops_aligned(model, src, mt, max_extra=3)
            assert script[-1] == EOS
            assert EOS not in script[:-1]
            assert len(script) - 1 <= len(mt) + 3

            pointer = 1
            for t, op in enumerate(script):
                assert 1 <= pointer <= len(mt) + 1
                if pointer > len(mt):
                    assert op not in (KEEP, DEL), (mt, script)
                if attention_mode == "forced":
                    # The attended MT position, clamped to the last word once everything is consumed
                    assert int(np.argmax(alignment[t])) == min(pointer, len(mt)) - 1
                if op in (KEEP, DEL):
                    pointer += 1

            output = apply_ops(mt, script)
            inserted = sum(isinstance(op, Ins) for op in script)
            assert len(output) == len(mt) - script.count(DEL) + inserted
            decoded += 1
    return decoded


@pytest.mark.parametrize("kind", MODELS)
def test_random_models_never_overrun(kind):
    assert _check_random_decodes(*kind, nb_models=5, nb_inputs=20) == 100


@pytest.mark.slow
def test_random_models_never_overrun_fuzzed():
    decoded = sum(_check_random_decodes(*kind.values[0], nb_models=10, nb_inputs=100) for kind in MODELS)
    assert decoded >= 1000


@pytest.mark.parametrize("kind", MODELS)
def test_alignment_rows(kind):
    architecture, attention_mode = kind
    model = toy_model(architecture, attention_mode)
    mt = ["a", "b", "c"]
    script, alignment = decode_ops_aligned(model, ["x", "y"], mt)
    assert alignment.shape == (len(script), len(mt))
    np.testing.assert_allclose(alignment.sum(axis=1), 1.0, rtol=1e-5)
    if attention_mode == "forced":
        assert set(np.unique(alignment).tolist()) <= {0.0, 1.0}


def test_decode_is_deterministic():
    model = toy_model("mono_source", "global", init_scale=1.0, seed=4)
    assert decode_ops(model, None, ["a", "c", "b"]) == decode_ops(model, None, ["a", "c", "b"])


def test_decode_errors():
    ops_model = toy_model("mono_source", "forced")
    words_model = toy_model("mono_source", "global", "words")
    with pytest.raises(MissingSource):
        decode_ops(toy_model("chained"), None, ["a"])
    with pytest.raises(EmptyInput):
        decode_ops(ops_model, None, [])
    with pytest.raises(WrongMode):
        decode_ops(words_model, None, ["a"])
    with pytest.raises(WrongMode):
        decode_words(ops_model, ["a"])


def test_decode_words():
    model = toy_model("mono_source", "global", "words", init_scale=1.0, seed=2)
    output = decode_words(model, ["a", "b"], max_len=5)
    assert len(output) <= 5
    assert not {model.target_vocab.pad, model.target_vocab.bos, model.target_vocab.eos} & set(output)
    assert decode_words(model, ["a", "b"], max_len=0) == []
    with pytest.raises(EmptyInput):
        decode_words(model, [])


def test_post_edit_unk_placeholder():
    model = toy_model("mono_source", "forced", init_scale=1.0, seed=1)
    mt = ["a", "b"]
    script = decode_ops(model, None, mt)
    assert post_edit(model, None, mt, unk_placeholder="<?>") == apply_ops(mt, script, unk_placeholder="<?>")


def test_decode_corpus_keeps_failures():
    model = toy_model("mono_source", "forced")
    inputs = [(None, ["a", "b"]), (None, []), (None, ["c"])]
    results = decode_corpus(model, inputs)
    assert [r.error is None for r in results] == [True, False, True]
    assert isinstance(results[1].error, EmptyInput)
    assert results[1].output == []
    assert results[1].script == [EOS]

    errors = {}
    outputs = post_edit_corpus(model, inputs, errors=errors)
    assert list(errors) == [1]
    assert outputs == [r.output for r in results]


def test_decode_corpus_threads():
    model = toy_model("mono_source", "global", init_scale=1.0)
    inputs = [(None, mt) for mt, _ in (Fake.token_pair(max_len=5) for _ in range(20)) if mt]
    assert post_edit_corpus(model, inputs, threads=4) == post_edit_corpus(model, inputs, threads=1)
    assert decode_corpus(model, []) == []
