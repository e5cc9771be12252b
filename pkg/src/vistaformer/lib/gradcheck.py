"""
Check tape gradients against central finite differences.
"""
import collections

import numpy as np

from vistaformer.errors import ContractError
from vistaformer.lib.tensor import Tensor, backward, no_grad

__all__ = ['GradCheckReport', 'grad_check']

DEFAULT_EPS = 1e-4
DEFAULT_TOL = 1e-4
# Gradients smaller than this are compared in absolute terms.
ERROR_FLOOR = 1e-2


class GradCheckReport(
        collections.namedtuple('GradCheckReport', 'max_rel_error tol n_checked worst')):

    @property
    def passed(self):
        return bool(self.max_rel_error < self.tol)

    def __str__(self):
        return '{0} max_rel_error={1:.3e} tol={2:.0e} ({3} coordinates, worst: {4})'.format(
            'PASS' if self.passed else 'FAIL',
            self.max_rel_error, self.tol, self.n_checked, self.worst or '-')


def grad_check(f, x, eps=DEFAULT_EPS, tol=DEFAULT_TOL, wrt=None, max_coords=24, seed=0):
    """
    Compare the gradient computed by `backward` with central differences.

    Non-scalar outputs of `f` are reduced to a scalar by a fixed random projection.

    :param f: Deterministic function of the input tensor(s).
    :param x: Input tensor or sequence of input tensors, passed to `f` positionally.
    :param wrt: Tensors to differentiate with respect to, defaults to the inputs. Pass \
    module parameters here to check them as well.
    :param max_coords: Number of randomly chosen coordinates checked per tensor.
    :return: `GradCheckReport`
    """
    inputs = [x] if isinstance(x, Tensor) else list(x)
    targets = list(inputs if wrt is None else wrt)
    for t in targets:
        if t.dtype != np.float64:
            raise ContractError(
                'gradient checking needs 64-bit tensors, got {0}'.format(t.dtype))
    rng = np.random.default_rng(seed)

    flags = [t.requires_grad for t in targets]
    for t in targets:
        # Coordinates are perturbed through a flat view.
        t.data = np.ascontiguousarray(t.data)
        t.requires_grad = True
        t.grad = None

    out = f(*inputs)
    weights = rng.standard_normal(out.shape)
    backward((out * weights).sum())

    def objective():
        with no_grad():
            return float(np.sum(f(*inputs).data * weights))

    worst, worst_name, n_checked = 0.0, None, 0
    for index, t in enumerate(targets):
        analytic = np.zeros(t.shape) if t.grad is None else t.grad
        analytic, flat = analytic.reshape(-1), t.data.reshape(-1)
        for i in rng.choice(t.size, size=min(max_coords, t.size), replace=False):
            orig = flat[i]
            flat[i] = orig + eps
            fp = objective()
            flat[i] = orig - eps
            fm = objective()
            flat[i] = orig
            numeric = (fp - fm) / (2 * eps)
            err = abs(analytic[i] - numeric) / max(abs(analytic[i]), abs(numeric), ERROR_FLOOR)
            n_checked += 1
            if err > worst:
                worst = err
                worst_name = '{0}[{1}]'.format(t.name or 'input{0}'.format(index), i)

    for t, flag in zip(targets, flags):
        t.requires_grad = flag
        t.grad = None
    return GradCheckReport(float(worst), tol, n_checked, worst_name)
