"""
The gradient check suite: every differentiable layer, and optionally the micro model
end to end, checked against central differences in 64-bit precision.
"""
import numpy as np

from vistaformer.lib import tensor as T
from vistaformer.lib.gradcheck import grad_check, DEFAULT_TOL
from vistaformer.nn.layers import Linear, LayerNorm, Conv3d, GatedConv3d
from vistaformer.nn.attention import MultiHeadSelfAttention, NeighbourhoodAttention2d
from vistaformer.nn.blocks import MixFFN, TransformerBlock
from vistaformer.models.config import micro_config
from vistaformer.models.vistaformer import build_model
from vistaformer.train.loss import cross_entropy_masked
from vistaformer.data.chip import IGNORE

__all__ = ['LAYERS', 'END_TO_END_TOL', 'gradient_suite']

END_TO_END_TOL = 1e-3


def _randomize(module, rng):
    # Replaces unit scales and zero shifts of the default initialization.
    for _, p in module.named_parameters():
        p.data = rng.standard_normal(p.shape) * 0.5
    return module


def _layer(factory, shape):
    def check(rng, tol):
        module = _randomize(factory(rng), rng)
        x = T.tensor(rng.standard_normal(shape))
        return grad_check(module, x, tol=tol, wrt=[x] + module.parameters())
    return check


def _function(f, shape):
    def check(rng, tol):
        return grad_check(f, T.tensor(rng.standard_normal(shape)), tol=tol)
    return check


def _cross_entropy(rng, tol):
    labels = rng.integers(0, 3, size=(2, 4, 4)).astype(np.uint8)
    labels[0, :2] = IGNORE
    return grad_check(
        lambda logits: cross_entropy_masked(logits, labels).loss,
        T.tensor(rng.standard_normal((2, 3, 4, 4))),
        tol=tol)


LAYERS = [
    ('linear', _layer(lambda rng: Linear(5, 4, rng), (2, 3, 5))),
    ('layer norm', _layer(lambda rng: LayerNorm(6), (3, 6))),
    ('conv3d', _layer(
        lambda rng: Conv3d(2, 3, (2, 3, 3), rng, stride=(1, 2, 1), padding=1),
        (1, 2, 3, 5, 5))),
    ('depthwise conv3d', _layer(
        lambda rng: Conv3d(3, 3, 3, rng, padding=1, groups=3), (1, 3, 3, 4, 4))),
    ('gated conv3d', _layer(
        lambda rng: GatedConv3d(2, 4, (1, 2, 2), (1, 2, 2), rng), (1, 2, 2, 4, 4))),
    ('mhsa', _layer(lambda rng: MultiHeadSelfAttention(4, 2, rng), (2, 3, 3, 4))),
    ('neighbourhood attention', _layer(
        lambda rng: NeighbourhoodAttention2d(4, 2, 3, rng), (2, 4, 5, 4))),
    ('mix ffn', _layer(lambda rng: MixFFN(4, 2, rng, residual=True), (1, 2, 3, 3, 4))),
    ('transformer block', _layer(
        lambda rng: TransformerBlock(4, MultiHeadSelfAttention(4, 2, rng), 2, rng),
        (1, 2, 3, 3, 4))),
    ('trilinear resize', _function(
        lambda x: T.trilinear_resize(x, (3, 5, 2)), (1, 2, 2, 3, 4))),
    ('softmax', _function(lambda x: T.softmax(x, axis=-1), (3, 5))),
    ('masked cross-entropy', _cross_entropy),
]


def end_to_end(rng, tol=END_TO_END_TOL, max_coords=4):
    """Check input and parameter gradients of the micro model on a (1, 4, 4, 8, 8) input."""
    model = build_model(micro_config(), seed=int(rng.integers(2 ** 31)))
    x = T.tensor(rng.standard_normal((1, 4, 4, 8, 8)))
    return grad_check(model, x, tol=tol, wrt=[x] + model.parameters(), max_coords=max_coords)


def gradient_suite(micro=False, seed=0, tol=DEFAULT_TOL):
    """
    Run the checks in 64-bit precision.

    :param micro: also check the micro model end to end, at `END_TO_END_TOL`.
    :return: list of pairs (check name, `GradCheckReport`).
    """
    res = []
    with T.precision('float64'):
        for i, (name, check) in enumerate(LAYERS):
            res.append((name, check(np.random.default_rng([seed, i]), tol)))
        if micro:
            res.append(('micro model', end_to_end(np.random.default_rng([seed, len(LAYERS)]))))
    return res
