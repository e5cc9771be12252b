"""
Dense real tensors backed by numpy arrays, with reverse-mode differentiation.

Every operation applied to a tensor which requires gradients records a `Node` holding
its inputs and a backward rule. `backward` collects the recorded nodes into a `Tape`
in topological order and replays it in reverse, accumulating gradients into the
leaves. Operations also report their work to an active FLOP counter (see
`vistaformer.lib.complexity`), using the convention that one multiply-accumulate
counts as one operation.

Tensors are created in 32-bit precision by default; use the `precision` context
manager to switch to 64 bits (required for gradient checking).
"""
import math
import itertools
import threading
import contextlib

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import special

from vistaformer.errors import ShapeError, ConfigurationError, ContractError

__all__ = [
    'Tensor', 'Node', 'Tape', 'tensor', 'parameter', 'zeros', 'ones',
    'precision', 'get_dtype', 'no_grad', 'grad_enabled', 'record',
    'counting', 'flop_scope', 'flop_category', 'count_flops', 'annotate_flops',
    'backward', 'matmul', 'einsum', 'softmax', 'log_softmax', 'layer_norm',
    'gelu', 'sigmoid', 'conv3d', 'conv3d_output_shape', 'trilinear_resize',
    'interpolation_matrix', 'take', 'pad', 'concat', 'maximum', 'dropout',
]

_state = threading.local()


def get_dtype():
    return getattr(_state, 'dtype', np.float32)


@contextlib.contextmanager
def precision(dtype):
    """Set the dtype of tensors created from raw data, e.g. `precision('float64')`."""
    previous = get_dtype()
    _state.dtype = np.dtype(dtype).type
    try:
        yield
    finally:
        _state.dtype = previous


def grad_enabled():
    return getattr(_state, 'grad_enabled', True)


@contextlib.contextmanager
def no_grad():
    previous = grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


#
# FLOP accounting hooks. The counter itself lives in vistaformer.lib.complexity, we
# only need an object with `push`, `pop` and `add` methods.
#
@contextlib.contextmanager
def counting(counter):
    previous = getattr(_state, 'counter', None)
    _state.counter = counter
    try:
        yield counter
    finally:
        _state.counter = previous


@contextlib.contextmanager
def flop_scope(name):
    counter = getattr(_state, 'counter', None)
    if counter is None or not name:
        yield
        return
    counter.push(name)
    try:
        yield
    finally:
        counter.pop()


@contextlib.contextmanager
def flop_category(category):
    """Book multiply-accumulates of matmul/einsum under `category` instead of 'linear'."""
    previous = getattr(_state, 'category', 'linear')
    _state.category = category
    try:
        yield
    finally:
        _state.category = previous


def count_flops(category, amount):
    counter = getattr(_state, 'counter', None)
    if counter is not None and amount:
        counter.add(category or getattr(_state, 'category', 'linear'), int(amount))


def annotate_flops(kind, **dims):
    """Attach the dimensions of a layer with an analytic cost formula to the current scope."""
    counter = getattr(_state, 'counter', None)
    if counter is not None:
        counter.annotate(kind, **dims)


class Node(object):

    """A recorded operation: inputs plus the rule mapping the output gradient to input
    gradients."""

    __slots__ = ('op', 'inputs', 'backward')

    def __init__(self, op, inputs, backward):
        self.op = op
        self.inputs = inputs
        self.backward = backward


class Tensor(object):

    """A dense real-valued array participating in reverse-mode differentiation.

    :param data: array-like; converted to the current default dtype.
    :param requires_grad: whether gradients should be accumulated in `grad`.
    :param name: optional name, used for parameters.
    """

    __array_priority__ = 100

    def __init__(self, data, requires_grad=False, name=None, dtype=None):
        self.data = np.array(data, dtype=dtype or get_dtype())
        self.requires_grad = requires_grad
        self.grad = None
        self.name = name
        self._node = None

    @classmethod
    def _from_op(cls, data, node=None):
        res = cls.__new__(cls)
        res.data = np.asarray(data)
        res.requires_grad = node is not None
        res.grad = None
        res.name = None
        res._node = node
        return res

    def __repr__(self):
        return 'Tensor(shape={0}, dtype={1}{2})'.format(
            self.shape, self.data.dtype, ', requires_grad=True' if self.requires_grad else '')

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def numpy(self):
        return self.data

    def item(self):
        return self.data.item()

    def detach(self):
        return Tensor._from_op(self.data)

    def zero_grad(self):
        self.grad = None

    def backward(self, grad=None):
        return backward(self, grad=grad)

    # Arithmetic
    def __add__(self, other):
        return _add(self, _wrap(other, self))

    __radd__ = __add__

    def __sub__(self, other):
        return _sub(self, _wrap(other, self))

    def __rsub__(self, other):
        return _sub(_wrap(other, self), self)

    def __mul__(self, other):
        return _mul(self, _wrap(other, self))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return _div(self, _wrap(other, self))

    def __rtruediv__(self, other):
        return _div(_wrap(other, self), self)

    def __neg__(self):
        return record('neg', -self.data, (self,), lambda g: (-g,))

    def __pow__(self, exponent):
        if isinstance(exponent, Tensor):
            raise ContractError('only scalar exponents are supported')
        x = self.data
        return record(
            'pow', x ** exponent, (self,), lambda g: (g * exponent * x ** (exponent - 1),))

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        shape = self.shape

        def _backward(g):
            res = np.zeros(shape, dtype=g.dtype)
            res[key] = g
            return (res,)
        return record('getitem', self.data[key], (self,), _backward)

    # Elementwise functions
    def exp(self):
        y = np.exp(self.data)
        return record('exp', y, (self,), lambda g: (g * y,))

    def log(self):
        x = self.data
        return record('log', np.log(x), (self,), lambda g: (g / x,))

    def sqrt(self):
        y = np.sqrt(self.data)
        return record('sqrt', y, (self,), lambda g: (g / (2 * y),))

    # Reductions
    def sum(self, axis=None, keepdims=False):
        shape = self.shape

        def _backward(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).copy(),)
        return record(
            'sum', np.sum(self.data, axis=axis, keepdims=keepdims), (self,), _backward)

    def mean(self, axis=None, keepdims=False):
        n = self.size if axis is None else np.prod([self.shape[a] for a in _axes(axis)])
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    def max(self, axis=None, keepdims=False):
        return maximum(self, axis=axis, keepdims=keepdims)

    # Shape manipulation
    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        source = self.shape
        return record(
            'reshape', self.data.reshape(shape), (self,), lambda g: (g.reshape(source),))

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        axes = axes or tuple(reversed(range(self.ndim)))
        inverse = tuple(np.argsort(axes))
        return record(
            'transpose',
            np.transpose(self.data, axes),
            (self,),
            lambda g: (np.transpose(g, inverse),))


def _axes(axis):
    return axis if isinstance(axis, tuple) else (axis,)


def _wrap(value, like):
    if isinstance(value, Tensor):
        return value
    return Tensor._from_op(np.asarray(value, dtype=like.data.dtype))


def _unbroadcast(g, shape):
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def tensor(data, requires_grad=False, name=None, dtype=None):
    return Tensor(data, requires_grad=requires_grad, name=name, dtype=dtype)


def parameter(data, name=None):
    return Tensor(data, requires_grad=True, name=name)


def zeros(shape, requires_grad=False):
    return Tensor(np.zeros(shape), requires_grad=requires_grad)


def ones(shape, requires_grad=False):
    return Tensor(np.ones(shape), requires_grad=requires_grad)


def record(op, data, inputs, backward_rule):
    """Create the output tensor of an operation, recording it when gradients are needed.

    :param op: Name of the operation.
    :param data: The computed output array.
    :param inputs: Tuple of input tensors.
    :param backward_rule: Callable mapping the output gradient to a tuple of input \
    gradients (one per input, `None` for inputs without gradient).
    """
    if grad_enabled() and any(t.requires_grad for t in inputs):
        return Tensor._from_op(data, Node(op, inputs, backward_rule))
    return Tensor._from_op(data)


class Tape(object):

    """The recorded operations leading to an output, in topological order."""

    def __init__(self, nodes):
        self.nodes = nodes

    def __len__(self):
        return len(self.nodes)

    @classmethod
    def from_output(cls, output):
        order, seen = [], set()
        stack = [(output, False)]
        while stack:
            t, expanded = stack.pop()
            if t._node is None:
                continue
            if expanded:
                order.append(t)
                continue
            if id(t) in seen:
                continue
            seen.add(id(t))
            stack.append((t, True))
            for child in t._node.inputs:
                if child._node is not None and id(child) not in seen:
                    stack.append((child, False))
        return cls(order)

    def replay(self, output, grad):
        """Propagate `grad` from `output` to all leaves; return the number of nodes visited.

        The tape is consumed: recorded nodes are released afterwards.
        """
        grads = {id(output): grad}
        visited = 0
        for t in reversed(self.nodes):
            g = grads.pop(id(t), None)
            if g is None:
                continue
            visited += 1
            for child, cg in zip(t._node.inputs, t._node.backward(g)):
                if cg is None or not child.requires_grad:
                    continue
                cg = _unbroadcast(np.asarray(cg), child.shape)
                if child._node is None:
                    child.grad = cg.astype(child.dtype) if child.grad is None \
                        else child.grad + cg
                else:
                    key = id(child)
                    grads[key] = cg if key not in grads else grads[key] + cg
        for t in self.nodes:
            t._node = None
        return visited


def backward(loss, grad=None):
    """Populate `.grad` of every leaf tensor `loss` depends on.

    :param loss: A scalar tensor (exactly one element).
    :return: The number of recorded operations replayed.
    """
    if loss.size != 1:
        raise ContractError('backward needs a scalar loss, got shape {0}'.format(loss.shape))
    grad = np.ones_like(loss.data) if grad is None else np.asarray(grad, dtype=loss.dtype)
    if loss._node is None:
        if loss.requires_grad:
            loss.grad = grad if loss.grad is None else loss.grad + grad
        return 0
    return Tape.from_output(loss).replay(loss, grad)


#
# Elementwise arithmetic: free in the FLOP accounting.
#
def _add(a, b):
    return record('add', a.data + b.data, (a, b), lambda g: (g, g))


def _sub(a, b):
    return record('sub', a.data - b.data, (a, b), lambda g: (g, -g))


def _mul(a, b):
    x, y = a.data, b.data
    return record('mul', x * y, (a, b), lambda g: (g * y, g * x))


def _div(a, b):
    x, y = a.data, b.data
    return record('div', x / y, (a, b), lambda g: (g / y, -g * x / (y * y)))


def sigmoid(x):
    y = special.expit(x.data)
    count_flops('other', y.size)
    return record('sigmoid', y, (x,), lambda g: (g * y * (1 - y),))


def gelu(x):
    """GELU in its exact erf formulation."""
    v = x.data
    cdf = 0.5 * (1.0 + special.erf(v / math.sqrt(2.0)))
    count_flops('other', v.size)

    def _backward(g):
        pdf = np.exp(-0.5 * v * v) / math.sqrt(2.0 * math.pi)
        return (g * (cdf + v * pdf),)
    return record('gelu', v * cdf, (x,), _backward)


def maximum(x, axis=None, keepdims=False):
    """Max reduction; the gradient is shared among tied maxima."""
    v = x.data
    m = np.max(v, axis=axis, keepdims=True)
    mask = (v == m)
    mask = mask / mask.sum(axis=axis, keepdims=True)
    count_flops('other', v.size)

    def _backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (g * mask,)
    return record(
        'max', m if keepdims else np.squeeze(m, axis=axis), (x,), _backward)


def dropout(x, rate, rng):
    """Inverted dropout with an explicit `numpy.random.Generator`."""
    if rate <= 0:
        return x
    if rate >= 1:
        return x * 0.0
    keep = (rng.random(x.shape) >= rate).astype(x.dtype) / (1.0 - rate)
    return x * keep


#
# Linear algebra
#
def matmul(a, b):
    """Batched matrix product over the last two axes, broadcasting leading axes."""
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError('matmul: incompatible shapes {0} and {1}'.format(a.shape, b.shape))
    try:
        np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    except ValueError:
        raise ShapeError('matmul: batch dims of {0} and {1} do not broadcast'.format(
            a.shape, b.shape))
    x, y = a.data, b.data
    out = np.matmul(x, y)
    count_flops(None, out.size * a.shape[-1])

    def _backward(g):
        return (
            np.matmul(g, np.swapaxes(y, -1, -2)) if a.requires_grad else None,
            np.matmul(np.swapaxes(x, -1, -2), g) if b.requires_grad else None)
    return record('matmul', out, (a, b), _backward)


def einsum(subscripts, a, b):
    """Two-operand `numpy.einsum` with gradients.

    Every index of an operand must appear in the other operand or in the output.
    """
    inputs, out_spec = subscripts.replace(' ', '').split('->')
    sa, sb = inputs.split(',')
    for spec, other in [(sa, sb), (sb, sa)]:
        if any(c not in other and c not in out_spec for c in spec):
            raise ContractError('einsum: unsupported reduction in {0}'.format(subscripts))
    x, y = a.data, b.data
    sizes = {}
    for spec, arr in [(sa, x), (sb, y)]:
        if len(spec) != arr.ndim:
            raise ShapeError('einsum {0}: operand shape {1}'.format(subscripts, arr.shape))
        for c, n in zip(spec, arr.shape):
            if sizes.setdefault(c, n) != n:
                raise ShapeError('einsum {0}: shapes {1} and {2}'.format(
                    subscripts, x.shape, y.shape))
    out = np.einsum(subscripts, x, y, optimize=True)
    count_flops(None, int(np.prod(list(sizes.values()), dtype=np.int64)))

    def _backward(g):
        return (
            np.einsum('{0},{1}->{2}'.format(out_spec, sb, sa), g, y, optimize=True)
            if a.requires_grad else None,
            np.einsum('{0},{1}->{2}'.format(out_spec, sa, sb), g, x, optimize=True)
            if b.requires_grad else None)
    return record('einsum', out, (a, b), _backward)


def softmax(x, axis=-1):
    v = x.data
    e = np.exp(v - np.max(v, axis=axis, keepdims=True))
    s = e / np.sum(e, axis=axis, keepdims=True)
    count_flops('other', 3 * v.size)
    return record(
        'softmax', s, (x,), lambda g: (s * (g - np.sum(g * s, axis=axis, keepdims=True)),))


def log_softmax(x, axis=-1):
    v = x.data
    shifted = v - np.max(v, axis=axis, keepdims=True)
    ls = shifted - np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))
    count_flops('other', 3 * v.size)
    return record(
        'log_softmax',
        ls,
        (x,),
        lambda g: (g - np.exp(ls) * np.sum(g, axis=axis, keepdims=True),))


def layer_norm(x, weight, bias, eps=1e-5):
    """Normalize over the last axis, then scale and shift."""
    v = x.data
    mu = v.mean(axis=-1, keepdims=True)
    xc = v - mu
    inv = 1.0 / np.sqrt((xc * xc).mean(axis=-1, keepdims=True) + eps)
    xhat = xc * inv
    w = weight.data
    count_flops('other', 5 * v.size)

    def _backward(g):
        gxhat = g * w
        gx = inv * (
            gxhat
            - gxhat.mean(axis=-1, keepdims=True)
            - xhat * (gxhat * xhat).mean(axis=-1, keepdims=True))
        lead = tuple(range(g.ndim - 1))
        return gx, (g * xhat).sum(axis=lead), g.sum(axis=lead)
    return record('layer_norm', xhat * w + bias.data, (x, weight, bias), _backward)


#
# Convolution and resampling
#
def _triple(value):
    if isinstance(value, int):
        return (value,) * 3
    return tuple(int(v) for v in value)


def conv3d_output_shape(shape, kernel, stride=1, padding=0):
    """(T', H', W') for input dims `shape` = (T, H, W)."""
    kernel, stride, padding = _triple(kernel), _triple(stride), _triple(padding)
    return tuple(
        (n + 2 * p - k) // s + 1 for n, k, s, p in zip(shape, kernel, stride, padding))


def conv3d(x, weight, bias=None, stride=1, padding=0, groups=1):
    """Direct 3D convolution of x (B, Cin, T, H, W) with weight (Cout, Cin/groups, kt, kh, kw).

    Depthwise convolutions (one input and one output channel per group) are summed per
    kernel offset in channels-last layout; all others are lowered to one batched matrix
    product per group over the unfolded input patches.
    """
    if x.ndim != 5 or weight.ndim != 5:
        raise ShapeError('conv3d: expected 5-d input and weight, got {0} and {1}'.format(
            x.shape, weight.shape))
    stride, padding = _triple(stride), _triple(padding)
    B, cin, T, H, W = x.shape
    cout, cin_g, kt, kh, kw = weight.shape
    if cin % groups or cout % groups or cin // groups != cin_g:
        raise ShapeError('conv3d: input {0} and weight {1} do not match groups={2}'.format(
            x.shape, weight.shape, groups))
    out_shape = conv3d_output_shape((T, H, W), (kt, kh, kw), stride, padding)
    if min(out_shape) < 1:
        raise ConfigurationError(
            'conv3d: non-positive output dims {0} for input {1}, kernel {2}, stride {3}'.format(
                out_shape, (T, H, W), (kt, kh, kw), stride))
    To, Ho, Wo = out_shape
    (st, sh, sw), (pt, ph, pw) = stride, padding
    cout_g = cout // groups
    offsets = list(itertools.product(range(kt), range(kh), range(kw)))
    w = weight.data

    def window(a, b, c, channels_last=False):
        win = (
            slice(a, a + st * (To - 1) + 1, st),
            slice(b, b + sh * (Ho - 1) + 1, sh),
            slice(c, c + sw * (Wo - 1) + 1, sw))
        if channels_last:
            return (slice(None),) + win + (slice(None),)
        return (Ellipsis,) + win

    if cin_g == 1 and cout_g == 1:
        # (B, T, H, W, C) with the channel vector innermost.
        xp = np.pad(
            np.moveaxis(x.data, 1, -1), ((0, 0), (pt, pt), (ph, ph), (pw, pw), (0, 0)))
        wl = np.ascontiguousarray(np.moveaxis(w[:, 0], 0, -1))
        out = np.zeros((B, To, Ho, Wo, cout), dtype=np.result_type(xp, wl))
        tmp = np.empty_like(out)
        for a, b, c in offsets:
            np.multiply(xp[window(a, b, c, True)], wl[a, b, c], out=tmp)
            out += tmp
        out = np.moveaxis(out, -1, 1)

        def _grads(g):
            gl = np.ascontiguousarray(np.moveaxis(g, 1, -1))
            gx = np.zeros_like(xp) if x.requires_grad else None
            gw = np.zeros_like(w) if weight.requires_grad else None
            buf = np.empty_like(gl)
            for a, b, c in offsets:
                win = window(a, b, c, True)
                if gw is not None:
                    np.multiply(gl, xp[win], out=buf)
                    gw[:, 0, a, b, c] = buf.sum(axis=(0, 1, 2, 3))
                if gx is not None:
                    np.multiply(gl, wl[a, b, c], out=buf)
                    gx[win] += buf
            if gx is not None:
                gx = np.moveaxis(gx[:, pt:pt + T, ph:ph + H, pw:pw + W], -1, 1)
            return gx, gw
    else:
        xp = np.pad(x.data, ((0, 0), (0, 0), (pt, pt), (ph, ph), (pw, pw)))
        # (groups, B*To*Ho*Wo, cin_g*kt*kh*kw)
        cols = sliding_window_view(xp, (kt, kh, kw), axis=(2, 3, 4))[:, :, ::st, ::sh, ::sw]
        cols = cols.reshape((B, groups, cin_g, To, Ho, Wo, kt, kh, kw))
        cols = cols.transpose((1, 0, 3, 4, 5, 2, 6, 7, 8)).reshape(
            (groups, B * To * Ho * Wo, cin_g * kt * kh * kw))
        wmat = w.reshape((groups, cout_g, cin_g * kt * kh * kw))
        out = np.matmul(cols, np.swapaxes(wmat, 1, 2))
        out = np.ascontiguousarray(
            out.reshape((groups, B, To, Ho, Wo, cout_g)).transpose((1, 0, 5, 2, 3, 4))
        ).reshape((B, cout, To, Ho, Wo))

        def _grads(g):
            go = g.reshape((B, groups, cout_g, To, Ho, Wo)).transpose(
                (1, 0, 3, 4, 5, 2)).reshape((groups, B * To * Ho * Wo, cout_g))
            gx, gw = None, None
            if weight.requires_grad:
                gw = np.matmul(np.swapaxes(go, 1, 2), cols).reshape(weight.shape)
            if x.requires_grad:
                gcols = np.matmul(go, wmat).reshape((groups, B, To, Ho, Wo, cin_g, kt, kh, kw))
                gcols = gcols.transpose((1, 0, 5, 6, 7, 8, 2, 3, 4)).reshape(
                    (B, cin, kt, kh, kw, To, Ho, Wo))
                gx = np.zeros_like(xp)
                for a, b, c in offsets:
                    gx[window(a, b, c)] += gcols[:, :, a, b, c]
                gx = gx[:, :, pt:pt + T, ph:ph + H, pw:pw + W]
            return gx, gw

    inputs = (x, weight)
    if bias is not None:
        out = out + bias.data.reshape((1, cout, 1, 1, 1))
        inputs = (x, weight, bias)
    count_flops('conv', out.size * cin_g * kt * kh * kw)

    def _backward(g):
        res = _grads(g)
        if bias is not None:
            res += (g.sum(axis=(0, 2, 3, 4)),)
        return res
    return record('conv3d', out, inputs, _backward)


def interpolation_matrix(n_in, n_out, dtype=np.float64):
    """Linear interpolation weights with half-pixel centers and border clamping.

    :return: (n_out, n_in) array M with `resized = M @ source`.
    """
    src = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0, n_in - 1)
    i0 = np.floor(src).astype(int)
    i1 = np.minimum(i0 + 1, n_in - 1)
    w1 = src - i0
    m = np.zeros((n_out, n_in), dtype=np.float64)
    rows = np.arange(n_out)
    np.add.at(m, (rows, i0), 1.0 - w1)
    np.add.at(m, (rows, i1), w1)
    return m.astype(dtype)


def trilinear_resize(x, size):
    """Resize the last three axes of x (B, C, T, H, W) to `size` = (T2, H2, W2).

    Axes whose length does not change are passed through exactly.
    """
    size = _triple(size)
    if min(size) < 1:
        raise ConfigurationError('trilinear_resize: invalid target {0}'.format(size))
    mats = [
        (axis, interpolation_matrix(n, m, dtype=x.dtype))
        for axis, n, m in zip(range(x.ndim - 3, x.ndim), x.shape[-3:], size) if n != m]
    if not mats:
        return x
    y = x.data
    for axis, m in mats:
        y = np.moveaxis(np.tensordot(m, y, axes=(1, axis)), 0, axis)
    count_flops('other', y.size)

    def _backward(g):
        for axis, m in reversed(mats):
            g = np.moveaxis(np.tensordot(m.T, g, axes=(1, axis)), 0, axis)
        return (g,)
    return record('trilinear_resize', y, (x,), _backward)


def take(x, indices, axis, count=False):
    """Gather along `axis` with a 1-d integer index array.

    :param count: book the gathered elements as FLOPs ("other").
    """
    indices = np.asarray(indices, dtype=np.intp)
    out = np.take(x.data, indices, axis=axis)
    if count:
        count_flops('other', out.size)
    shape = x.shape

    def _backward(g):
        res = np.zeros(shape, dtype=g.dtype)
        np.add.at(np.moveaxis(res, axis, 0), indices, np.moveaxis(g, axis, 0))
        return (res,)
    return record('take', out, (x,), _backward)


def pad(x, widths):
    """Zero padding; `widths` as for `numpy.pad`."""
    widths = [tuple(w) for w in widths]
    index = tuple(slice(before, before + n) for (before, _), n in zip(widths, x.shape))
    return record('pad', np.pad(x.data, widths), (x,), lambda g: (g[index],))


def concat(tensors, axis=0):
    tensors = list(tensors)
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]
    return record(
        'concat',
        np.concatenate([t.data for t in tensors], axis=axis),
        tuple(tensors),
        lambda g: tuple(np.split(g, bounds, axis=axis)))
