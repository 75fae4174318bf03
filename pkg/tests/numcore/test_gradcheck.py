import numpy as np
import pytest

from apedit.numcore import LSTMParams, Parameter, ParameterStore, Tensor, float64_mode, grad_check, lstm_step, ops
from apedit.numcore.gradcheck import relative_error


def test_relative_error():
    assert relative_error(1.0, 1.0) == 0.0
    assert relative_error(2.0, 1.0) == pytest.approx(0.5)
    assert relative_error(0.0, 0.0) == 0.0


@pytest.mark.parametrize(
    "analytic,numeric,expected",
    [
        pytest.param(0.0, 1e-10, 1e-2, id="below-floor"),
        pytest.param(0.0, 1e-8, 1.0, id="at-floor"),
        pytest.param(1e-7, 2e-7, 0.5, id="above-floor"),
    ],
)
def test_relative_error_floor(analytic, numeric, expected):
    assert relative_error(analytic, numeric) == pytest.approx(expected)


def test_lstm_gradients():
    rng = np.random.default_rng(1)
    with float64_mode():
        store = ParameterStore(rng, init_scale=0.5)
        params = LSTMParams.create(store, "lstm", input_size=3, hidden_size=2)
        x = Tensor(rng.normal(size=(2, 3)))
        h0 = Tensor(rng.normal(size=(2, 2)))
        c0 = Tensor(rng.normal(size=(2, 2)))

        def loss_fn():
            h, c = lstm_step(x, h0, c0, params)
            h, c = lstm_step(x, h, c, params)
            return ops.sum_all(ops.mul(h, h))

        report = grad_check(loss_fn, list(store))
    assert report.passed(1e-4), report.worst()
    assert report.checked_entries == 5 * 8 + 8


def test_attention_gradients():
    rng = np.random.default_rng(2)
    with float64_mode():
        states = Parameter("states", rng.normal(size=(2, 4, 3)))
        query = Parameter("query", rng.normal(size=(2, 3)))
        mask = np.array([[0, 0, 0, -1e9], [0, 0, 0, 0]], dtype=np.float64)

        def loss_fn():
            scores = ops.reshape(ops.matmul(states, ops.reshape(query, (2, 3, 1))), (2, 4))
            weights = ops.softmax(ops.add(scores, ops.constant(mask)))
            context = ops.reshape(ops.matmul(ops.reshape(weights, (2, 1, 4)), states), (2, 3))
            return ops.sum_all(ops.tanh(context))

        report = grad_check(loss_fn, [states, query])
    assert report.passed(1e-4), report.worst()


def test_sampled_entries():
    rng = np.random.default_rng(3)
    with float64_mode():
        w = Parameter("w", rng.normal(size=(20, 20)))
        report = grad_check(lambda: ops.sum_all(ops.tanh(w)), [w], max_entries=10)
    assert report.checked_entries == 10
    assert report.passed()


def test_frozen_path():
    # A parameter that does not reach the loss has zero analytic and numeric gradient
    with float64_mode():
        used, unused = Parameter("used", [0.3, -0.2]), Parameter("unused", [1.0])
        report = grad_check(lambda: ops.sum_all(ops.sigmoid(used)), [used, unused])
    assert report.per_param["unused"] == 0.0
    assert report.passed()


def test_needs_float64():
    w = Parameter("w", [1.0])
    with pytest.raises(ValueError):
        grad_check(lambda: ops.sum_all(w), [w])
