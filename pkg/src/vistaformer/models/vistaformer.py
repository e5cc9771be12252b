"""
The three-stage encoder and the lightweight decoder.
"""
import collections

import numpy as np
from zope.interface import implementer

from vistaformer.interfaces import IReducer
from vistaformer.errors import ConfigurationError, ContractError, ShapeError
from vistaformer.lib import tensor as T
from vistaformer.nn.layers import Module, ModuleList, LayerNorm, Conv3d, GatedConv3d, prod
from vistaformer.nn.attention import MultiHeadSelfAttention, NeighbourhoodAttention2d
from vistaformer.nn.blocks import TransformerBlock
from vistaformer.models.config import AttentionKind, DecoderReduce

__all__ = [
    'EncoderOutputs', 'EncoderStage', 'Decoder', 'VistaFormer', 'build_model',
    'encoder_forward', 'decoder_forward', 'model_forward', 'count_parameters',
    'mc_dropout_predict', 'rotation_discrepancy']

EncoderOutputs = collections.namedtuple('EncoderOutputs', 'e1 e2 e3')


class EncoderStage(Module):

    """Gated patch embedding, Transformer blocks over the token grid, layer norm."""

    def __init__(self, in_channels, stage, patch, stride, cfg, drop_paths, rng):
        Module.__init__(self)
        dim = stage.embed_dim
        self.embed = GatedConv3d(in_channels, dim, patch, stride, rng, gated=cfg.gated_conv)
        self.blocks = ModuleList()
        for drop_path in drop_paths:
            if cfg.attention == AttentionKind.na:
                attn = NeighbourhoodAttention2d(
                    dim, stage.num_heads, cfg.na_kernel, rng, attn_drop=cfg.dropout_rate)
            else:
                attn = MultiHeadSelfAttention(
                    dim, stage.num_heads, rng, attn_drop=cfg.dropout_rate)
            self.blocks.append(TransformerBlock(
                dim, attn, stage.mlp_mult, rng, drop=cfg.dropout_rate, drop_path=drop_path))
        self.norm = LayerNorm(dim)

    def forward(self, x):
        x = self.embed(x).transpose(0, 2, 3, 4, 1)
        for block in self.blocks:
            x = block(x)
        return self.norm(x).transpose(0, 4, 1, 2, 3)

    def forward_shape(self, shape):
        B, C, t, H, W = self.embed.trace(shape)
        tokens = (B, t, H, W, C)
        for block in self.blocks:
            block.trace(tokens)
        self.norm.trace(tokens)
        return B, C, t, H, W


@implementer(IReducer)
class TemporalConv(Conv3d):

    """Collapses T with a kernel spanning the whole stage sequence length."""

    def __init__(self, in_channels, out_channels, seq_len, rng):
        Conv3d.__init__(self, in_channels, out_channels, (seq_len, 1, 1), rng)
        self.seq_len = seq_len

    def forward(self, x):
        if x.shape[2] != self.seq_len:
            raise ShapeError('temporal reducer: expected T={0}, got shape {1}'.format(
                self.seq_len, x.shape))
        return Conv3d.forward(self, x)


@implementer(IReducer)
class TemporalMaxPool(Module):
    def forward(self, x):
        return T.maximum(x, axis=2, keepdims=True)

    def forward_shape(self, shape):
        T.count_flops('other', prod(shape))
        return shape[:2] + (1,) + shape[3:]


class Decoder(Module):

    """
    Upsample every stage output to the input (H, W) keeping its T, collapse T per stage,
    concatenate the branches on channels and classify each pixel with a 1x1 convolution.
    """

    def __init__(self, cfg, seq_lens, rng):
        Module.__init__(self)
        self.reducers = ModuleList()
        channels = 0
        for stage, seq_len in zip(cfg.stages, seq_lens):
            if cfg.decoder_reduce == DecoderReduce.maxpool:
                self.reducers.append(TemporalMaxPool())
                channels += stage.embed_dim
            else:
                self.reducers.append(
                    TemporalConv(stage.embed_dim, cfg.decoder_channels, seq_len, rng))
                channels += cfg.decoder_channels
        self.head = Conv3d(channels, cfg.num_classes, 1, rng)

    def forward(self, features, size):
        """
        :param features: Stage outputs (B, C_i, T_i, h_i, w_i).
        :param size: Target (H, W).
        :return: Logits (B, num_classes, H, W).
        """
        branches = []
        for e, reduce in zip(features, self.reducers):
            branches.append(reduce(T.trilinear_resize(e, (e.shape[2],) + tuple(size))))
        logits = self.head(T.concat(branches, axis=1))
        return logits.reshape(logits.shape[:2] + logits.shape[3:])

    def trace(self, shapes, size):
        with T.flop_scope(self.name):
            return self.forward_shape(shapes, size)

    def forward_shape(self, shapes, size):
        branches = []
        for shape, reduce in zip(shapes, self.reducers):
            up = shape[:3] + tuple(size)
            if up != shape:
                T.count_flops('other', prod(up))
            branches.append(reduce.trace(up))
        B, _, _, H, W = branches[0]
        out = self.head.trace((B, sum(b[1] for b in branches), 1, H, W))
        return out[:2] + out[3:]


class VistaFormer(Module):

    """
    Encoder-decoder segmentation model for inputs (B, C, T, H, W).

    Inputs shorter than `max_seq_len` are zero-padded at the end of the time axis, H and W
    are zero-padded at the trailing edge to multiples of the encoder downsampling and the
    logits are cropped back.
    """

    def __init__(self, cfg, rng):
        Module.__init__(self)
        self.cfg = cfg
        self.seq_lens = cfg.stage_seq_lens()
        depth = sum(s.num_blocks for s in cfg.stages)
        rates = iter(np.linspace(0, cfg.drop_path_rate, depth).tolist() if depth else [])
        self.stages = ModuleList()
        in_channels = cfg.in_channels
        for stage, (patch, stride) in zip(cfg.stages, cfg.stage_geometry()):
            self.stages.append(EncoderStage(
                in_channels, stage, patch, stride, cfg,
                [next(rates) for _ in range(stage.num_blocks)], rng))
            in_channels = stage.embed_dim
        self.decoder = Decoder(cfg, self.seq_lens, rng)

    def padding(self, shape):
        """Trailing zero padding (T, H, W) applied to an input of `shape`."""
        if len(shape) != 5 or shape[1] != self.cfg.in_channels:
            raise ShapeError('expected input (B, {0}, T, H, W), got {1}'.format(
                self.cfg.in_channels, shape))
        _, _, t, H, W = shape
        if t > self.cfg.max_seq_len:
            raise ConfigurationError(
                'input has T={0} time steps, the model is built for at most {1}'.format(
                    t, self.cfg.max_seq_len))
        f = self.cfg.spatial_factor
        return self.cfg.max_seq_len - t, -H % f, -W % f

    def pad_input(self, x):
        pt, ph, pw = self.padding(x.shape)
        if pt or ph or pw:
            x = T.pad(x, [(0, 0), (0, 0), (0, pt), (0, ph), (0, pw)])
        return x

    def encode(self, x):
        res = []
        for stage in self.stages:
            x = stage(x)
            res.append(x)
        return EncoderOutputs(*res) if len(res) == 3 else tuple(res)

    def forward(self, x):
        H, W = x.shape[3:]
        x = self.pad_input(x)
        logits = self.decoder(self.encode(x), x.shape[3:])
        if logits.shape[2:] != (H, W):
            logits = logits[:, :, :H, :W]
        return logits

    def forward_shape(self, shape):
        pt, ph, pw = self.padding(shape)
        B, C, t, H, W = shape
        x = (B, C, t + pt, H + ph, W + pw)
        features = []
        for stage in self.stages:
            x = stage.trace(x)
            features.append(x)
        out = self.decoder.trace(features, (H + ph, W + pw))
        return out[:2] + (H, W)


def build_model(cfg, seed=0):
    """
    Build a model with parameters initialized deterministically from `seed`.

    :raises ConfigurationError: for invalid configs, naming the offending stage or field.
    """
    cfg.validate()
    model = VistaFormer(cfg, np.random.default_rng(seed))
    model.set_rng(np.random.default_rng([seed, 1]))
    return model.eval()


def encoder_forward(x, model, training=False):
    model.train(training)
    return model.encode(model.pad_input(x))


def decoder_forward(e, model, size=None):
    """Logits for encoder outputs `e`; `size` defaults to twice the first stage's (H, W)."""
    size = size or tuple(2 * n for n in e[0].shape[3:])
    return model.decoder(e, size)


def model_forward(x, model, training=False):
    model.train(training)
    return model(x)


def count_parameters(model):
    """
    Trainable scalars grouped by top-level part.

    :return: `OrderedDict` with keys `stage1` ... `stageN`, `decoder`, `head` and `total`.
    """
    res = collections.OrderedDict()
    for i, stage in enumerate(model.stages, start=1):
        res['stage{0}'.format(i)] = stage.num_parameters()
    res['decoder'] = model.decoder.reducers.num_parameters()
    res['head'] = model.decoder.head.num_parameters()
    res['total'] = model.num_parameters()
    return res


def mc_dropout_predict(x, model, n_passes=10, seed=0):
    """
    Monte-Carlo dropout: average the class probabilities of `n_passes` forwards with
    dropout and drop-path active.

    :return: pair (mean probabilities (B, K, H, W), predictive entropy (B, H, W)).
    """
    if n_passes < 1:
        raise ContractError('n_passes must be at least 1, got {0}'.format(n_passes))
    mode, rng = model.training, model.rng
    model.set_rng(np.random.default_rng(seed))
    model.train(True)
    try:
        with T.no_grad():
            probs = np.stack([T.softmax(model(x), axis=1).data for _ in range(n_passes)])
    finally:
        model.train(mode)
        model.set_rng(rng)
    mean = probs.mean(axis=0)
    entropy = -np.sum(mean * np.log(np.maximum(mean, np.finfo(mean.dtype).tiny)), axis=1)
    return mean, entropy


def rotation_discrepancy(model, x):
    """Max abs difference between logits of the rotated input and rotated logits."""
    with T.no_grad():
        model.eval()
        direct = np.rot90(model(x).data, axes=(-2, -1))
        rotated = model(T.tensor(np.rot90(x.data, axes=(-2, -1)).copy())).data
    return float(np.max(np.abs(direct - rotated)))
