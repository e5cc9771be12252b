"""
Operation counts.

Analytic cost formulas for self-attention, neighbourhood attention and 3D convolution,
plus a counter collecting the operations the layers of a model perform.

Counting convention:

- one multiply-accumulate counts as one operation; matrix products, einsum contractions
  and convolutions contribute their number of multiply-accumulates,
- "other" operations are counted per element: softmax 3, layer norm 5, GELU 1,
  sigmoid 1, interpolation 1 per output element, max over time 1 per input element,
  neighbourhood window gathering 1 per gathered element,
- elementwise arithmetic (residual sums, gating products, scaling), padding, reshaping
  and concatenation are free.

Multiply-accumulates of the QKV projections and the score and value products are booked
as "attention", those of all other linear layers as "linear", convolutions as "conv".
"""
import csv
import pathlib
import collections

import numpy as np

from vistaformer.errors import ContractError
from vistaformer.lib import tensor as T

__all__ = [
    'CATEGORIES', 'CONVENTION',
    'attn_flops', 'attn_memory', 'na_flops', 'na_memory', 'conv3d_flops', 'conv3d_memory',
    'FlopCounter', 'FlopEntry', 'FlopReport', 'trace_flops', 'measure_flops', 'model_flops',
    'ScalingRow', 'scaling_report', 'write_scaling_csv', 'loglog_slope']

CATEGORIES = ('attention', 'conv', 'linear', 'other')
CONVENTION = '1 multiply-accumulate = 1 FLOP; ' \
             'other per element: softmax 3, layer norm 5, GELU 1, sigmoid 1, ' \
             'interpolation 1, max-pool 1, window gather 1'


def _check(**dims):
    for name, value in dims.items():
        if int(value) != value or value < 1:
            raise ContractError('{0} must be a positive integer, got {1}'.format(name, value))


def attn_flops(H, W, C):
    """Single-head self-attention over H*W tokens: 3HWC^2 + 2(HW)^2 C."""
    _check(H=H, W=W, C=C)
    return 3 * H * W * C * C + 2 * (H * W) ** 2 * C


def attn_memory(H, W, C):
    _check(H=H, W=W, C=C)
    return 3 * C * C + (H * W) ** 2


def na_flops(H, W, C, K):
    """Neighbourhood attention with K x K windows: 3HWC^2 + 2HWCK^2."""
    _check(H=H, W=W, C=C, K=K)
    return 3 * H * W * C * C + 2 * H * W * C * K * K


def na_memory(H, W, C, K):
    _check(H=H, W=W, C=C, K=K)
    return 3 * C * C + H * W * K * K


def conv3d_flops(H, W, C, K):
    """3D convolution with C input and output channels and a K^3 kernel: HWC^2K^3."""
    _check(H=H, W=W, C=C, K=K)
    return H * W * C * C * K ** 3


def conv3d_memory(C, K):
    _check(C=C, K=K)
    return C * C * K ** 3


def _analytic(kind, dims):
    """(flops, memory) of an annotated layer. Attention formulas apply per slice."""
    if kind == 'attn':
        args = (dims['H'], dims['W'], dims['C'])
        return attn_flops(*args) * dims['slices'], attn_memory(*args)
    if kind == 'na':
        H, W, C, kh, kw = (dims[k] for k in ('H', 'W', 'C', 'Kh', 'Kw'))
        # Windows are clipped to the grid, so they are K x K only on large grids.
        if kh == kw:
            return na_flops(H, W, C, kh) * dims['slices'], na_memory(H, W, C, kh)
        return (3 * H * W * C * C + 2 * H * W * C * kh * kw) * dims['slices'], \
            3 * C * C + H * W * kh * kw
    raise ValueError(kind)  # pragma: no cover


class FlopCounter(object):

    """Collects counts per dotted layer scope while layers run or are traced."""

    def __init__(self):
        self._stack = []
        self.counts = collections.OrderedDict()
        self.annotations = collections.OrderedDict()

    @property
    def scope(self):
        return '.'.join(self._stack)

    def push(self, name):
        self._stack.append(name)

    def pop(self):
        self._stack.pop()

    def add(self, category, amount):
        if category not in CATEGORIES:
            raise ValueError(category)
        self.counts.setdefault(self.scope, collections.Counter())[category] += amount

    def annotate(self, kind, **dims):
        self.annotations.setdefault(self.scope, []).append((kind, dims))

    def report(self):
        """Aggregate counts into layers: annotated scopes absorb their sub-scopes."""
        layers = collections.OrderedDict()
        annotated = sorted(self.annotations, key=len, reverse=True)

        def layer_of(scope):
            for prefix in annotated:
                if scope == prefix or scope.startswith(prefix + '.'):
                    return prefix
            return scope

        for scope, counts in self.counts.items():
            layers.setdefault(layer_of(scope), collections.Counter()).update(counts)
        for scope in self.annotations:
            layers.setdefault(scope, collections.Counter())

        entries = []
        for name, counts in layers.items():
            analytic, memory = 0, 0
            for kind, dims in self.annotations.get(name, []):
                flops, mem = _analytic(kind, dims)
                analytic += flops
                memory += mem
            entries.append(FlopEntry(
                name or '<model>',
                analytic,
                sum(counts.values()),
                memory,
                {c: counts.get(c, 0) for c in CATEGORIES}))
        return FlopReport(entries)


class FlopEntry(
        collections.namedtuple('FlopEntry', 'name analytic measured memory categories')):
    pass


class FlopReport(object):

    """Per-layer counts with totals per category."""

    convention = CONVENTION

    def __init__(self, entries):
        self.entries = list(entries)
        self.totals = collections.OrderedDict(
            (c, sum(e.categories[c] for e in self.entries)) for c in CATEGORIES)

    @property
    def total(self):
        return sum(self.totals.values())

    @property
    def attention(self):
        return self.totals['attention']

    @property
    def analytic_total(self):
        return sum(e.analytic for e in self.entries)

    def by_prefix(self, depth=1):
        """Measured totals grouped by the first `depth` components of the layer names."""
        res = collections.OrderedDict()
        for e in self.entries:
            key = '.'.join(e.name.split('.')[:depth])
            res[key] = res.get(key, 0) + e.measured
        return res

    def __eq__(self, other):
        return isinstance(other, FlopReport) and self.entries == other.entries

    def __ne__(self, other):  # pragma: no cover
        return not self.__eq__(other)


def trace_flops(module, shape):
    """Count the operations of `module` on an input of `shape` without running it."""
    counter = FlopCounter()
    with T.counting(counter):
        module.trace(shape)
    return counter.report()


def measure_flops(module, *inputs):
    """Count the operations of an actual eval-mode forward of `module`."""
    counter = FlopCounter()
    training = module.training
    module.eval()
    try:
        with T.counting(counter), T.no_grad():
            module(*inputs)
    finally:
        module.train(training)
    return counter.report()


def model_flops(cfg, input_shape, measure=False, seed=0):
    """
    Operation counts of the model described by `cfg` for inputs of `input_shape`.

    :param measure: run an instrumented forward on random inputs instead of tracing \
    shapes. Only feasible for small shapes; both give identical reports.
    """
    from vistaformer.models.vistaformer import build_model

    model = build_model(cfg, seed=seed)
    if measure:
        rng = np.random.default_rng(seed)
        return measure_flops(model, T.tensor(rng.standard_normal(input_shape)))
    return trace_flops(model, input_shape)


ScalingRow = collections.namedtuple(
    'ScalingRow', 'variant B C T H W total_flops attn_flops')


def scaling_report(cfgs, axis, values, batch=4, seq_len=30, size=64):
    """
    Sweep the input size of several model variants.

    :param cfgs: mapping of variant name to `ModelConfig`.
    :param axis: 'spatial' to sweep H = W (with T = `seq_len`) or 'temporal' to sweep T \
    (with H = W = `size`). Models are built for the swept sequence length.
    :return: list of `ScalingRow`, one per value and variant.
    """
    if axis not in ('spatial', 'temporal'):
        raise ContractError('axis must be spatial or temporal, got {0!r}'.format(axis))
    rows = []
    for value in values:
        for variant, cfg in cfgs.items():
            t, hw = (seq_len, value) if axis == 'spatial' else (value, size)
            shape = (batch, cfg.in_channels, t, hw, hw)
            report = model_flops(cfg._replace(max_seq_len=t), shape)
            rows.append(ScalingRow(variant, *shape, report.total, report.attention))
    return rows


def write_scaling_csv(rows, path):
    path = pathlib.Path(path)
    with path.open('w', encoding='utf8', newline='') as fp:
        writer = csv.writer(fp, lineterminator='\n')
        writer.writerow(ScalingRow._fields)
        for row in rows:
            writer.writerow(['{0}'.format(v) for v in row])
    return path


def loglog_slope(xs, ys):
    """Least-squares slope of log(ys) against log(xs)."""
    return float(np.polyfit(np.log(np.asarray(xs, dtype=float)),
                            np.log(np.asarray(ys, dtype=float)), 1)[0])
