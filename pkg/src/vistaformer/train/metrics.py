"""
Confusion matrices and the segmentation scores derived from them.
"""
import collections

import numpy as np

from vistaformer.errors import ContractError, ShapeError
from vistaformer.data.chip import IGNORE

__all__ = ['ConfusionMatrix', 'update_confusion', 'Metrics', 'compute_metrics']


class ConfusionMatrix(object):

    """K x K pixel counts, rows indexed by the true class, columns by the prediction."""

    def __init__(self, num_classes, counts=None):
        self.num_classes = num_classes
        self.counts = np.zeros((num_classes, num_classes), dtype=np.int64) \
            if counts is None else np.asarray(counts, dtype=np.int64)
        if self.counts.shape != (num_classes, num_classes):
            raise ShapeError('counts {0} for {1} classes'.format(self.counts.shape, num_classes))

    @property
    def total(self):
        return int(self.counts.sum())

    def __add__(self, other):
        if other.num_classes != self.num_classes:
            raise ShapeError('cannot merge confusion matrices for {0} and {1} classes'.format(
                self.num_classes, other.num_classes))
        return ConfusionMatrix(self.num_classes, self.counts + other.counts)

    def __eq__(self, other):
        return isinstance(other, ConfusionMatrix) and np.array_equal(self.counts, other.counts)

    def __ne__(self, other):  # pragma: no cover
        return not self.__eq__(other)


def update_confusion(cm, pred, true, ignore=IGNORE):
    """Add the pixels of `pred` and `true` to `cm`, skipping those where `true == ignore`."""
    pred, true = np.asarray(pred), np.asarray(true)
    if pred.shape != true.shape:
        raise ShapeError('predictions {0} do not match labels {1}'.format(pred.shape, true.shape))
    scored = true != ignore
    K = cm.num_classes
    t, p = true[scored].astype(np.int64), pred[scored].astype(np.int64)
    if t.size and (t.max() >= K or p.max() >= K or min(t.min(), p.min()) < 0):
        raise ContractError('class index out of range for {0} classes'.format(K))
    cm.counts += np.bincount(K * t + p, minlength=K * K).reshape(K, K)
    return cm


Metrics = collections.namedtuple('Metrics', 'oA mIoU iou recall')


def compute_metrics(cm, exclude=()):
    """
    Overall accuracy, mean IoU and per-class IoU and recall.

    Classes with an empty union (absent from truth and predictions) and the classes in
    `exclude` have IoU `nan` and do not enter the mean.

    :raises ContractError: if `cm` counts no pixels.
    """
    counts = cm.counts.astype(np.float64)
    total = counts.sum()
    if not total:
        raise ContractError('cannot compute metrics from an empty confusion matrix')
    tp = np.diag(counts)
    rows, cols = counts.sum(axis=1), counts.sum(axis=0)
    union = rows + cols - tp
    with np.errstate(invalid='ignore', divide='ignore'):
        iou = np.where(union > 0, tp / union, np.nan)
        recall = np.where(rows > 0, tp / rows, np.nan)
    for k in exclude:
        iou[k] = np.nan
    scored = iou[~np.isnan(iou)]
    return Metrics(
        float(tp.sum() / total),
        float(scored.mean()) if scored.size else float('nan'),
        iou,
        recall)
