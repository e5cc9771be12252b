"""
Cross-entropy over pixels with an ignore label.
"""
import collections

import numpy as np

from vistaformer.errors import ContractError, ShapeError
from vistaformer.lib import tensor as T
from vistaformer.data.chip import IGNORE

__all__ = ['LossResult', 'scored_labels', 'cross_entropy_masked']


class LossResult(collections.namedtuple('LossResult', 'loss scored all_ignored')):

    """`loss` is a scalar tensor, `scored` the number of pixels contributing to it."""

    def __float__(self):
        return float(self.loss.item())


def scored_labels(labels, num_classes, ignore=IGNORE, exclude=()):
    """
    Labels with the classes in `exclude` mapped to `ignore`.

    :raises ContractError: for labels that are neither a class nor `ignore`.
    """
    labels = np.asarray(labels)
    bad = (labels >= num_classes) & (labels != ignore) | (labels < 0)
    if bad.any():
        raise ContractError('label {0} is neither a class of {1} nor the ignore label'.format(
            int(labels[bad][0]), num_classes))
    if len(exclude):
        labels = np.where(np.isin(labels, list(exclude)), ignore, labels)
    return labels


def cross_entropy_masked(logits, labels, ignore=IGNORE, class_weights=None, exclude=()):
    """
    Mean negative log-likelihood of the true class over scored pixels.

    With `class_weights` every pixel is weighted by the weight of its class and the
    mean is taken with respect to the total weight. Pixels labelled `ignore` (or with a
    class in `exclude`) contribute neither to the loss nor to its gradient.

    :param logits: tensor (B, K, H, W).
    :param labels: integer array (B, H, W).
    :return: `LossResult`; if no pixel is scored, the loss is 0 with zero gradients and \
    `all_ignored` is set.
    """
    B, K = logits.shape[:2]
    if np.shape(labels) != (B,) + tuple(logits.shape[2:]):
        raise ShapeError('labels {0} do not match logits {1}'.format(
            np.shape(labels), logits.shape))
    labels = scored_labels(labels, K, ignore=ignore, exclude=exclude)
    scored = labels != ignore
    n = int(scored.sum())
    if not n:
        return LossResult((logits * 0.0).sum(), 0, True)

    weights = np.ones(K) if class_weights is None else np.asarray(class_weights, dtype=float)
    if weights.shape != (K,):
        raise ShapeError('{0} class weights for {1} classes'.format(weights.size, K))
    safe = np.where(scored, labels, 0).astype(np.intp)
    pixel_weights = np.where(scored, weights[safe], 0.0)
    coef = np.zeros(logits.shape)
    np.put_along_axis(coef, safe[:, None], pixel_weights[:, None], axis=1)
    coef /= -pixel_weights.sum()
    loss = (T.log_softmax(logits, axis=1) * coef.astype(logits.dtype)).sum()
    return LossResult(loss, n, False)
