"""
Layer base class and the elementary layers.

Layers are plain objects holding parameter tensors as attributes. Sub-layers assigned
as attributes are registered under the attribute name, which also serves as the layer's
scope in FLOP reports. Every layer has two entry points:

- `__call__` runs `forward` on tensors,
- `trace` runs `forward_shape`, which reports the FLOPs `forward` would count for an
  input of the given shape without computing anything.
"""
import numpy as np
from scipy import stats
from zope.interface import implementer

from vistaformer.interfaces import IModule
from vistaformer.errors import ConfigurationError, ShapeError
from vistaformer.lib import tensor as T

__all__ = [
    'Module', 'ModuleList', 'Linear', 'LayerNorm', 'Conv3d', 'GatedConv3d', 'gated_conv3d',
    'Dropout', 'DropPath', 'trunc_normal', 'prod']

INIT_STD = 0.02


def prod(shape):
    res = 1
    for n in shape:
        res *= int(n)
    return res


def trunc_normal(rng, shape, std=INIT_STD):
    """Normal samples truncated at two standard deviations."""
    return stats.truncnorm.rvs(-2, 2, scale=std, size=shape, random_state=rng)


@implementer(IModule)
class Module(object):
    name = None

    def __init__(self):
        self.training = False
        self.rng = None

    def __setattr__(self, key, value):
        if isinstance(value, Module):
            object.__setattr__(value, 'name', key)
        object.__setattr__(self, key, value)

    def __call__(self, *args, **kw):
        with T.flop_scope(self.name):
            return self.forward(*args, **kw)

    def trace(self, shape):
        with T.flop_scope(self.name):
            return self.forward_shape(tuple(shape))

    def forward(self, *args, **kw):  # pragma: no cover
        raise NotImplementedError()

    def forward_shape(self, shape):  # pragma: no cover
        raise NotImplementedError()

    def children(self):
        for value in vars(self).values():
            if isinstance(value, Module):
                yield value

    def modules(self):
        yield self
        for child in self.children():
            for m in child.modules():
                yield m

    def named_parameters(self, prefix=''):
        for key, value in vars(self).items():
            if isinstance(value, T.Tensor) and value.requires_grad:
                yield prefix + key, value
            elif isinstance(value, Module):
                for item in value.named_parameters(prefix='{0}{1}.'.format(prefix, key)):
                    yield item

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def num_parameters(self):
        return sum(p.size for p in self.parameters())

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def train(self, mode=True):
        for m in self.modules():
            object.__setattr__(m, 'training', mode)
        return self

    def eval(self):
        return self.train(False)

    def set_rng(self, rng):
        """Share the generator `rng` with all stochastic layers."""
        for m in self.modules():
            object.__setattr__(m, 'rng', rng)
        return self


class ModuleList(Module):
    def __init__(self, modules=()):
        Module.__init__(self)
        self._n = 0
        for m in modules:
            self.append(m)

    def append(self, module):
        setattr(self, str(self._n), module)
        if self.name:
            # Items are called directly, so their scope carries the list name.
            object.__setattr__(module, 'name', '{0}.{1}'.format(self.name, self._n))
        self._n += 1

    def __len__(self):
        return self._n

    def __iter__(self):
        return (getattr(self, str(i)) for i in range(self._n))

    def __getitem__(self, i):
        return getattr(self, str(range(self._n)[i]))


class Linear(Module):

    """Affine map over the last axis: `x @ weight + bias` with weight of shape (in, out)."""

    def __init__(self, in_features, out_features, rng, bias=True):
        Module.__init__(self)
        self.in_features, self.out_features = in_features, out_features
        self.weight = T.parameter(trunc_normal(rng, (in_features, out_features)))
        self.bias = T.parameter(np.zeros(out_features)) if bias else None

    def forward(self, x):
        if x.shape[-1] != self.in_features:
            raise ShapeError('linear: input {0} does not match weight {1}'.format(
                x.shape, self.weight.shape))
        lead = x.shape[:-1]
        y = T.matmul(x.reshape(-1, self.in_features), self.weight)
        if self.bias is not None:
            y = y + self.bias
        return y.reshape(lead + (self.out_features,))

    def forward_shape(self, shape):
        T.count_flops(None, prod(shape[:-1]) * self.in_features * self.out_features)
        return shape[:-1] + (self.out_features,)


class LayerNorm(Module):
    def __init__(self, dim, eps=1e-5):
        Module.__init__(self)
        self.eps = eps
        self.weight = T.parameter(np.ones(dim))
        self.bias = T.parameter(np.zeros(dim))

    def forward(self, x):
        return T.layer_norm(x, self.weight, self.bias, eps=self.eps)

    def forward_shape(self, shape):
        T.count_flops('other', 5 * prod(shape))
        return shape


class Conv3d(Module):

    """3D convolution on (B, C, T, H, W) volumes."""

    def __init__(self, in_channels, out_channels, kernel, rng, stride=1, padding=0, groups=1):
        Module.__init__(self)
        if in_channels % groups or out_channels % groups:
            raise ConfigurationError('conv3d: channels {0}->{1} not divisible by groups={2}'
                                     .format(in_channels, out_channels, groups))
        self.kernel = T._triple(kernel)
        self.stride, self.padding, self.groups = T._triple(stride), T._triple(padding), groups
        self.out_channels = out_channels
        shape = (out_channels, in_channels // groups) + self.kernel
        bound = 1.0 / np.sqrt(prod(shape[1:]))
        self.weight = T.parameter(rng.uniform(-bound, bound, size=shape))
        self.bias = T.parameter(rng.uniform(-bound, bound, size=out_channels))

    def forward(self, x):
        return T.conv3d(
            x, self.weight, self.bias,
            stride=self.stride, padding=self.padding, groups=self.groups)

    def output_shape(self, shape):
        dims = T.conv3d_output_shape(shape[2:], self.kernel, self.stride, self.padding)
        if min(dims) < 1:
            raise ConfigurationError(
                'conv3d: non-positive output dims {0} for input {1}, kernel {2}, stride {3}'
                .format(dims, shape[2:], self.kernel, self.stride))
        return (shape[0], self.out_channels) + dims

    def forward_shape(self, shape):
        out = self.output_shape(shape)
        T.count_flops('conv', prod(out) * prod(self.weight.shape[1:]))
        return out


def gated_conv3d(x, phi_l, phi_m):
    """`phi_l(x) * sigmoid(phi_m(x))` for two convolutions of identical geometry."""
    if phi_l.weight.shape != phi_m.weight.shape \
            or (phi_l.stride, phi_l.padding) != (phi_m.stride, phi_m.padding):
        raise ConfigurationError(
            'gated conv: feature branch {0} and gate branch {1} differ'.format(
                phi_l.weight.shape, phi_m.weight.shape))
    return phi_l(x) * T.sigmoid(phi_m(x))


class GatedConv3d(Module):

    """
    Patch embedding by a gated convolution.

    The feature branch `phi_l` has no activation; its output is modulated by the sigmoid of
    the gate branch `phi_m`. With `gated=False` only the feature branch is built.
    """

    def __init__(self, in_channels, out_channels, kernel, stride, rng, gated=True):
        Module.__init__(self)
        self.phi_l = Conv3d(in_channels, out_channels, kernel, rng, stride=stride)
        self.phi_m = Conv3d(in_channels, out_channels, kernel, rng, stride=stride) \
            if gated else None

    @property
    def gated(self):
        return self.phi_m is not None

    def forward(self, x):
        if not self.gated:
            return self.phi_l(x)
        return gated_conv3d(x, self.phi_l, self.phi_m)

    def forward_shape(self, shape):
        out = self.phi_l.trace(shape)
        if self.gated:
            self.phi_m.trace(shape)
            T.count_flops('other', prod(out))
        return out


class Dropout(Module):
    def __init__(self, rate):
        Module.__init__(self)
        if not 0 <= rate < 1:
            raise ConfigurationError('dropout rate must be in [0, 1), got {0}'.format(rate))
        self.rate = rate

    def forward(self, x):
        if not self.training or self.rate == 0:
            return x
        return T.dropout(x, self.rate, self.rng)

    def forward_shape(self, shape):
        return shape


class DropPath(Module):

    """Stochastic depth: zero a residual branch per sample (axis 0), rescale survivors."""

    def __init__(self, rate):
        Module.__init__(self)
        self.rate = rate

    def forward(self, x):
        if not self.training or self.rate <= 0:
            return x
        if self.rate >= 1:
            return x * 0.0
        keep = (self.rng.random(x.shape[0]) >= self.rate) / (1.0 - self.rate)
        return x * keep.astype(x.dtype).reshape((-1,) + (1,) * (x.ndim - 1))

    def forward_shape(self, shape):
        return shape
