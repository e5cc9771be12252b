"""
The feed-forward network with depthwise 3D convolution and the pre-norm Transformer block.

Blocks operate on token volumes (B, T, H, W, C).
"""
from vistaformer.interfaces import IAttention
from vistaformer.errors import ContractError
from vistaformer.lib import tensor as T
from vistaformer.nn.layers import Module, Linear, LayerNorm, Conv3d, Dropout, DropPath, prod

__all__ = ['MixFFN', 'TransformerBlock', 'mix_ffn', 'transformer_block']


class MixFFN(Module):

    """
    `lin2(GELU(dw(lin1(x))))`, where `dw` is a depthwise 3x3x3 convolution over (T, H, W)
    supplying positional information.

    :param residual: add the input to the branch output. Off inside a block, which adds \
    the residual itself.
    """

    def __init__(self, dim, mult, rng, drop=0.0, residual=False):
        Module.__init__(self)
        self.hidden = dim * mult
        self.residual = residual
        self.lin1 = Linear(dim, self.hidden, rng)
        self.dw = Conv3d(self.hidden, self.hidden, 3, rng, padding=1, groups=self.hidden)
        self.lin2 = Linear(self.hidden, dim, rng)
        self.drop = Dropout(drop)

    def forward(self, x):
        h = self.lin1(x).transpose(0, 4, 1, 2, 3)
        h = T.gelu(self.dw(h).transpose(0, 2, 3, 4, 1))
        out = self.drop(self.lin2(h))
        return out + x if self.residual else out

    def forward_shape(self, shape):
        B, t, H, W, _ = shape
        hidden = self.lin1.trace(shape)
        self.dw.trace((B, self.hidden, t, H, W))
        T.count_flops('other', prod(hidden))
        return self.lin2.trace(hidden)


class TransformerBlock(Module):

    """
    Pre-norm block: `y = x + drop_path(attn(norm1(x)))`, `out = y + drop_path(ffn(norm2(y)))`.

    The attention layer sees each (batch, time) slice as an independent token grid.
    """

    def __init__(self, dim, attention, mlp_mult, rng, drop=0.0, drop_path=0.0):
        Module.__init__(self)
        if not IAttention.providedBy(attention):
            raise ContractError(
                'block attention must provide IAttention, got {0!r}'.format(attention))
        self.norm1 = LayerNorm(dim)
        self.attn = attention
        self.norm2 = LayerNorm(dim)
        self.ffn = MixFFN(dim, mlp_mult, rng, drop=drop)
        self.drop_path = DropPath(drop_path)

    def forward(self, x):
        B, t, H, W, C = x.shape
        a = self.attn(self.norm1(x).reshape(B * t, H, W, C))
        x = x + self.drop_path(a.reshape(B, t, H, W, C))
        return x + self.drop_path(self.ffn(self.norm2(x)))

    def forward_shape(self, shape):
        B, t, H, W, C = shape
        self.norm1.trace(shape)
        self.attn.trace((B * t, H, W, C))
        self.norm2.trace(shape)
        self.ffn.trace(shape)
        return shape


def mix_ffn(x, ffn):
    """Apply `ffn` with its residual to a channel-first volume (B, C, T, H, W)."""
    tokens = x.transpose(0, 2, 3, 4, 1)
    out = ffn(tokens)
    if not ffn.residual:
        out = out + tokens
    return out.transpose(0, 4, 1, 2, 3)


def transformer_block(x, block, training=False):
    """Apply `block` to a channel-first volume (B, C, T, H, W)."""
    block.train(training)
    return block(x.transpose(0, 2, 3, 4, 1)).transpose(0, 4, 1, 2, 3)
