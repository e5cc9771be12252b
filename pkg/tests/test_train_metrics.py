import math

import numpy as np
import pytest

from vistaformer.errors import ContractError, ShapeError
from vistaformer.data.chip import IGNORE
from vistaformer.train.metrics import *


def test_metrics():
    res = compute_metrics(ConfusionMatrix(2, [[3, 1], [1, 3]]))
    assert res.oA == pytest.approx(0.75)
    assert res.mIoU == pytest.approx(0.6)
    assert np.allclose(res.iou, [0.6, 0.6])
    assert np.allclose(res.recall, [0.75, 0.75])


def test_update_confusion():
    cm = ConfusionMatrix(3)
    true = np.array([[0, 1], [2, IGNORE]])
    pred = np.array([[0, 2], [2, 1]])
    update_confusion(cm, pred, true)
    assert cm.total == 3
    assert cm.counts[1, 2] == 1 and cm.counts[2, 2] == 1
    with pytest.raises(ContractError):
        update_confusion(cm, np.array([3]), np.array([0]))
    with pytest.raises(ShapeError):
        update_confusion(cm, pred, true[0])


def test_absent_and_excluded_classes():
    cm = ConfusionMatrix(3, [[2, 0, 0], [1, 1, 0], [0, 0, 0]])
    res = compute_metrics(cm)
    assert math.isnan(res.iou[2])
    assert res.mIoU == pytest.approx((2 / 3 + 1 / 2) / 2)
    assert compute_metrics(cm, exclude=(0,)).mIoU == pytest.approx(0.5)
    with pytest.raises(ContractError):
        compute_metrics(ConfusionMatrix(3))


def test_confusion_arithmetic():
    a = ConfusionMatrix(2, [[1, 0], [0, 1]])
    assert (a + a).counts.tolist() == [[2, 0], [0, 2]]
    assert a == ConfusionMatrix(2, np.eye(2))
    assert a != ConfusionMatrix(2)
    with pytest.raises(ShapeError):
        a + ConfusionMatrix(3)
    with pytest.raises(ShapeError):
        ConfusionMatrix(2, [[1]])


def test_constant_prediction_scores_class_frequency(rng):
    true = rng.integers(0, 4, size=(3, 16, 16))
    true[0, :2] = IGNORE
    cm = ConfusionMatrix(4)
    for t in true:
        update_confusion(cm, np.full(t.shape, 2), t)
    valid = true[true != IGNORE]
    assert compute_metrics(cm).oA == pytest.approx((valid == 2).mean())
