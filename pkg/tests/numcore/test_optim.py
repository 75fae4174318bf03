import numpy as np
import pytest

from apedit.numcore import Parameter, grad_norm, sgd_step


def _param(value, grad) -> Parameter:
    param = Parameter("p", value)
    param.grad[:] = grad
    return param


def test_zero_lr_leaves_params():
    param = _param([1.0, 2.0], [3.0, 4.0])
    sgd_step([param], lr=0.0)
    np.testing.assert_array_equal(param.value, [1.0, 2.0])
    np.testing.assert_array_equal(param.grad, [0.0, 0.0])


def test_sgd_step():
    param = _param([1.0], [0.5])
    norm = sgd_step([param], lr=1.0)
    np.testing.assert_allclose(param.value, [0.5])
    assert norm == pytest.approx(0.5)
    np.testing.assert_array_equal(param.grad, [0.0])


def test_clipping():
    a, b = _param([0.0], [3.0]), _param([0.0], [4.0])
    assert grad_norm([a, b]) == pytest.approx(5.0)
    norm = sgd_step([a, b], lr=1.0, clip_norm=1.0)
    assert norm == pytest.approx(5.0)
    np.testing.assert_allclose(a.value, [-0.6])
    np.testing.assert_allclose(b.value, [-0.8])


def test_clipping_below_threshold():
    param = _param([0.0], [0.5])
    sgd_step([param], lr=1.0, clip_norm=1.0)
    np.testing.assert_allclose(param.value, [-0.5])


def test_negative_lr():
    with pytest.raises(ValueError):
        sgd_step([_param([1.0], [1.0])], lr=-0.1)
