import numpy as np
import pytest

from vistaformer.errors import ContractError
from vistaformer.lib import tensor as T
from vistaformer.lib.gradcheck import grad_check


def test_grad_check_passes(float64, rng):
    x = T.tensor(rng.standard_normal((3, 4)))
    report = grad_check(lambda x: (x * x).exp().sum(axis=1), x)
    assert report.passed
    assert report.n_checked == 12
    assert 'PASS' in str(report)


def test_grad_check_detects_wrong_gradients(float64, rng):
    def wrong(x):
        # Doubles the gradient of the identity.
        return T.record('wrong', x.data.copy(), (x,), lambda g: (2 * g,))

    report = grad_check(wrong, T.tensor(rng.standard_normal(5)))
    assert not report.passed
    assert report.max_rel_error == pytest.approx(0.5, rel=1e-3)
    assert report.worst.startswith('input0')


def test_grad_check_restores_inputs(float64, rng):
    data = rng.standard_normal(6)
    x = T.tensor(data)
    grad_check(lambda x: x * 3, x)
    assert np.array_equal(x.data, data)
    assert x.grad is None
    assert not x.requires_grad


def test_grad_check_needs_float64():
    with pytest.raises(ContractError):
        grad_check(lambda x: x * 2, T.tensor(np.ones(3)))


def test_grad_check_parameters(float64, rng):
    w = T.parameter(rng.standard_normal((4, 2)), name='w')
    x = T.tensor(rng.standard_normal((3, 4)))
    report = grad_check(lambda x: T.matmul(x, w), x, wrt=[x, w], max_coords=5)
    assert report.passed
    assert report.n_checked == 10
    assert w.requires_grad
