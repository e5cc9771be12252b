"""
Spatial attention over token grids.

Both layers take a stack of token grids of shape (S, H, W, C), where S enumerates
(batch, time) slices; tokens attend only within their own slice. Spatial positions are
flattened row-major.
"""
import math

import numpy as np
from zope.interface import implementer

from vistaformer.interfaces import IAttention
from vistaformer.errors import ConfigurationError
from vistaformer.lib import tensor as T
from vistaformer.nn.layers import Module, Linear, Dropout

__all__ = ['MultiHeadSelfAttention', 'NeighbourhoodAttention2d', 'window_index', 'mhsa', 'na2d']


class _Attention(Module):
    def __init__(self, dim, num_heads, rng, attn_drop=0.0):
        Module.__init__(self)
        if num_heads < 1 or dim % num_heads:
            raise ConfigurationError(
                'attention: {0} channels not divisible by {1} heads'.format(dim, num_heads))
        self.dim, self.num_heads = dim, num_heads
        self.head_dim = dim // num_heads
        self.scale = 1.0 / math.sqrt(self.head_dim)
        self.qkv = Linear(dim, 3 * dim, rng)
        self.attn_drop = Dropout(attn_drop)
        self.proj = Linear(dim, dim, rng)

    def split_heads(self, x):
        """(S, ..., C) projections to three (S, heads, ..., head_dim) tensors."""
        lead = x.shape[:-1]
        x = x.reshape(lead + (3, self.num_heads, self.head_dim))
        n = len(lead)
        x = x.transpose((n, 0, n + 1) + tuple(range(1, n)) + (n + 2,))
        return x[0], x[1], x[2]

    def merge_heads(self, x):
        """(S, heads, ..., head_dim) to (S, ..., C)."""
        n = x.ndim
        x = x.transpose((0,) + tuple(range(2, n - 1)) + (1, n - 1))
        return x.reshape(x.shape[:-2] + (self.dim,))


@implementer(IAttention)
class MultiHeadSelfAttention(_Attention):

    """Global multi-head self-attention within each slice, with a fused QKV projection."""

    def attend(self, x):
        """Attention over token sequences (S, N, C)."""
        with T.flop_category('attention'):
            q, k, v = self.split_heads(self.qkv(x))
            scores = T.matmul(q, k.transpose((0, 1, 3, 2))) * self.scale
            attn = self.attn_drop(T.softmax(scores, axis=-1))
            out = T.matmul(attn, v)
        return self.proj(self.merge_heads(out))

    def forward(self, x):
        S, H, W, C = x.shape
        T.annotate_flops('attn', H=H, W=W, C=C, slices=S)
        return self.attend(x.reshape(S, H * W, C)).reshape(S, H, W, C)

    def forward_shape(self, shape):
        S, H, W, C = shape
        T.annotate_flops('attn', H=H, W=W, C=C, slices=S)
        N = H * W
        with T.flop_category('attention'):
            self.qkv.trace((S, N, C))
            T.count_flops(None, 2 * S * N * N * C)
        T.count_flops('other', 3 * S * self.num_heads * N * N)
        self.proj.trace((S, N, C))
        return shape


def window_index(n, k):
    """
    Indices of the length-`min(k, n)` window around each of `n` positions.

    Windows are centered where possible and shifted inward at the borders.

    :return: (n, min(k, n)) integer array.
    """
    ke = min(k, n)
    start = np.clip(np.arange(n) - k // 2, 0, n - ke)
    return start[:, None] + np.arange(ke)[None, :]


@implementer(IAttention)
class NeighbourhoodAttention2d(_Attention):

    """
    Multi-head attention of each token to the k x k spatial window around it.

    Windows keep their full size at the borders, so every token attends to exactly
    min(k, H) * min(k, W) tokens.
    """

    def __init__(self, dim, num_heads, kernel_size, rng, attn_drop=0.0):
        if kernel_size < 1 or kernel_size % 2 == 0:
            raise ConfigurationError(
                'neighbourhood size must be a positive odd number, got {0}'.format(kernel_size))
        _Attention.__init__(self, dim, num_heads, rng, attn_drop=attn_drop)
        self.kernel_size = kernel_size

    def windows(self, x, rows, cols, count=False):
        """Gather (S, h, H, W, d) into (S, h, H, kh, W, kw, d) neighbourhoods."""
        S, h, H, W, d = x.shape
        (kh, kw) = rows.shape[1], cols.shape[1]
        x = T.take(x, rows.reshape(-1), axis=2).reshape(S, h, H, kh, W, d)
        x = T.take(x, cols.reshape(-1), axis=4, count=count)
        return x.reshape(S, h, H, kh, W, kw, d)

    def forward(self, x):
        S, H, W, C = x.shape
        rows, cols = window_index(H, self.kernel_size), window_index(W, self.kernel_size)
        kh, kw = rows.shape[1], cols.shape[1]
        T.annotate_flops('na', H=H, W=W, C=C, K=self.kernel_size, Kh=kh, Kw=kw, slices=S)
        with T.flop_category('attention'):
            q, k, v = self.split_heads(self.qkv(x))
            scores = T.einsum(
                'shxyd,shxaybd->shxyab', q, self.windows(k, rows, cols, count=True))
            scores = scores * self.scale
            attn = T.softmax(scores.reshape(S, self.num_heads, H, W, kh * kw), axis=-1)
            attn = self.attn_drop(attn).reshape(S, self.num_heads, H, W, kh, kw)
            out = T.einsum(
                'shxyab,shxaybd->shxyd', attn, self.windows(v, rows, cols, count=True))
        return self.proj(self.merge_heads(out))

    def forward_shape(self, shape):
        S, H, W, C = shape
        kh, kw = min(self.kernel_size, H), min(self.kernel_size, W)
        T.annotate_flops('na', H=H, W=W, C=C, K=self.kernel_size, Kh=kh, Kw=kw, slices=S)
        gathered = S * H * W * kh * kw * C
        with T.flop_category('attention'):
            self.qkv.trace((S, H, W, C))
            T.count_flops(None, 2 * gathered)
        T.count_flops('other', 2 * gathered + 3 * S * self.num_heads * H * W * kh * kw)
        self.proj.trace(shape)
        return shape


def mhsa(x, attention):
    """Apply `attention` to token sequences (N, C) or (S, N, C)."""
    if x.ndim == 2:
        return attention.attend(x.reshape((1,) + x.shape)).reshape(x.shape)
    return attention.attend(x)


def na2d(x, attention):
    """Apply neighbourhood `attention` to token grids (S, H, W, C)."""
    return attention(x)
