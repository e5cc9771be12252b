"""
Adam with decoupled weight decay, and the one-cycle learning rate schedule.
"""
import math
import collections

import numpy as np

from vistaformer.errors import ContractError, ConfigurationError

__all__ = ['OptimState', 'adam_step', 'adamw_step', 'LrSchedule', 'one_cycle_lr']


class OptimState(object):

    """
    Moment buffers of a fixed list of parameters.

    Weight decay applies to parameters with at least two dimensions; biases and
    normalization parameters are exempt.
    """

    def __init__(self, params, beta1=0.9, beta2=0.999, eps=1e-8, weight_decay=0.01):
        self.m = [np.zeros_like(p.data) for p in params]
        self.v = [np.zeros_like(p.data) for p in params]
        self.decay = [p.ndim > 1 for p in params]
        self.step = 0
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.weight_decay = weight_decay

    def __len__(self):
        return len(self.m)


def _grads(params, grads, state):
    if not (len(params) == len(grads) == len(state)):
        raise ContractError('{0} parameters, {1} gradients, {2} optimizer slots'.format(
            len(params), len(grads), len(state)))
    for i, (p, g) in enumerate(zip(params, grads)):
        if g is None:
            g = np.zeros_like(p.data)
        elif g.shape != p.shape or state.m[i].shape != p.shape:
            raise ContractError('gradient {0} does not match parameter {1} of shape {2}'.format(
                g.shape, i, p.shape))
        yield i, p, g


def adam_step(params, grads, state, lr):
    """One Adam update of `params` in place, with bias-corrected moments."""
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1, c2 = 1 - b1 ** state.step, 1 - b2 ** state.step
    for i, p, g in _grads(params, grads, state):
        state.m[i] = b1 * state.m[i] + (1 - b1) * g
        state.v[i] = b2 * state.v[i] + (1 - b2) * g * g
        update = (state.m[i] / c1) / (np.sqrt(state.v[i] / c2) + state.eps)
        p.data = (p.data - lr * update).astype(p.data.dtype)
    return state


def adamw_step(params, grads, state, lr):
    """
    Adam with weight decay applied to the weights directly: p <- p (1 - lr wd) before the
    Adam update. With zero decay this is exactly `adam_step`.

    :param params: list of parameter tensors, updated in place.
    :param grads: list of gradient arrays; `None` counts as a zero gradient.
    """
    if state.weight_decay:
        for i, p in enumerate(params):
            if state.decay[i]:
                p.data = (p.data * (1 - lr * state.weight_decay)).astype(p.data.dtype)
    return adam_step(params, grads, state, lr)


class LrSchedule(collections.namedtuple(
        'LrSchedule', 'total_steps warm_fraction lr_start lr_max lr_final')):

    def __new__(cls, total_steps, warm_fraction=0.1, lr_start=4e-4, lr_max=1e-2, lr_final=1e-3):
        if total_steps < 0 or not 0 <= warm_fraction < 1:
            raise ConfigurationError('invalid schedule: {0} steps, warm fraction {1}'.format(
                total_steps, warm_fraction))
        return super(LrSchedule, cls).__new__(
            cls, total_steps, warm_fraction, lr_start, lr_max, lr_final)

    @property
    def warm_steps(self):
        return self.warm_fraction * self.total_steps


def _cosine(start, end, progress):
    progress = min(max(progress, 0.0), 1.0)
    return end + (start - end) * 0.5 * (1 + math.cos(math.pi * progress))


def one_cycle_lr(step, sched):
    """
    Cosine ramp from `lr_start` to `lr_max` over the first `warm_fraction` of the steps,
    then cosine annealing to `lr_final`, reached at the last step `total_steps - 1`.
    """
    if sched.total_steps < 2:
        return sched.lr_start
    warm, last = sched.warm_steps, sched.total_steps - 1
    if step <= warm:
        return _cosine(sched.lr_start, sched.lr_max, step / warm if warm else 1.0)
    return _cosine(sched.lr_max, sched.lr_final, (step - warm) / (last - warm))
