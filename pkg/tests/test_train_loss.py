import numpy as np
import pytest

from vistaformer.errors import ContractError, ShapeError
from vistaformer.lib import tensor as T
from vistaformer.data.chip import IGNORE
from vistaformer.train.loss import *


@pytest.fixture
def logits(rng, float64):
    return T.tensor(rng.standard_normal((2, 3, 2, 2)), requires_grad=True)


@pytest.fixture
def labels():
    return np.array([[[0, 1], [2, IGNORE]], [[1, 1], [IGNORE, 0]]], dtype=np.uint8)


def _nll(logits, labels, weights=(1.0, 1.0, 1.0)):
    x = logits.data
    logp = x - np.log(np.exp(x).sum(axis=1, keepdims=True))
    total, norm = 0.0, 0.0
    for b, i, j in np.argwhere(labels != IGNORE):
        w = weights[labels[b, i, j]]
        total -= w * logp[b, labels[b, i, j], i, j]
        norm += w
    return total / norm


def test_cross_entropy(logits, labels):
    res = cross_entropy_masked(logits, labels)
    assert (res.scored, res.all_ignored) == (6, False)
    assert float(res) == pytest.approx(_nll(logits, labels))

    res.loss.backward()
    assert np.allclose(logits.grad[0, :, 1, 1], 0)
    assert np.allclose(logits.grad[1, :, 1, 0], 0)
    assert not np.allclose(logits.grad[0, :, 0, 0], 0)
    # Per pixel, the softmax gradient sums to zero over classes.
    assert np.allclose(logits.grad.sum(axis=1), 0)


def test_all_ignored(logits):
    res = cross_entropy_masked(logits, np.full((2, 2, 2), IGNORE, dtype=np.uint8))
    assert res.all_ignored and res.scored == 0
    assert float(res) == 0
    res.loss.backward()
    assert not logits.grad.any()


def test_class_weights(logits, labels):
    w = [1.0, 2.0, 3.0]
    res = cross_entropy_masked(logits, labels, class_weights=w)
    assert float(res) == pytest.approx(_nll(logits, labels, w))
    with pytest.raises(ShapeError):
        cross_entropy_masked(logits, labels, class_weights=[1.0])


def test_exclude(logits, labels):
    res = cross_entropy_masked(logits, labels, exclude=(1,))
    assert res.scored == 3
    masked = np.where(labels == 1, IGNORE, labels)
    assert float(res) == pytest.approx(_nll(logits, masked))
    assert (scored_labels(labels, 3, exclude=(1,)) == masked).all()


def test_invalid_labels(logits, labels):
    with pytest.raises(ShapeError):
        cross_entropy_masked(logits, labels[:1])
    bad = labels.copy()
    bad[0, 0, 0] = 5
    with pytest.raises(ContractError):
        cross_entropy_masked(logits, bad)
