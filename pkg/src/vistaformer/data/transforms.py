"""
Augmentation and normalization of `SitsChip` samples.
"""
import collections

import numpy as np

from vistaformer.errors import ShapeError

__all__ = ['Augmentation', 'draw_augmentation', 'apply_augmentation', 'augment', 'normalize']

APPLY_PROB = 0.5


class Augmentation(collections.namedtuple('Augmentation', 'hflip vflip rot90')):
    def __new__(cls, hflip=False, vflip=False, rot90=False):
        return super(Augmentation, cls).__new__(cls, bool(hflip), bool(vflip), bool(rot90))

    @property
    def is_identity(self):
        return not any(self)


def draw_augmentation(rng):
    """Each transformation is drawn independently with probability 0.5."""
    return Augmentation(*(rng.random(3) < APPLY_PROB))


def _transform(a, aug):
    # The last two axes are always (H, W).
    if aug.hflip:
        a = a[..., ::-1]
    if aug.vflip:
        a = a[..., ::-1, :]
    if aug.rot90:
        a = np.rot90(a, axes=(-2, -1))
    return np.ascontiguousarray(a)


def apply_augmentation(chip, aug):
    """
    Apply `aug` to input, labels and cloud mask of `chip` alike.

    Rotation is skipped for non-square chips, since it would change the grid shape.
    """
    if chip.labels.shape[0] != chip.labels.shape[1]:
        aug = aug._replace(rot90=False)
    if aug.is_identity:
        return chip
    return chip.replace(
        input=_transform(chip.input, aug),
        labels=_transform(chip.labels, aug),
        cloud_mask=None if chip.cloud_mask is None else _transform(chip.cloud_mask, aug))


def augment(chip, seed):
    """Random flips and 90 degree rotation, deterministic under `seed`."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return apply_augmentation(chip, draw_augmentation(rng))


def normalize(chip, stats):
    """
    Standardize each channel: (x - mean_c) / std_c. Channels with zero spread are only
    centered.

    :param stats: pair of per-channel sequences (mean, std).
    """
    mean, std = (np.asarray(s, dtype=np.float64) for s in stats)
    C = chip.input.shape[0]
    if mean.shape != (C,) or std.shape != (C,):
        raise ShapeError('stats of shape {0}/{1} do not match {2} channels'.format(
            mean.shape, std.shape, C))
    std = np.where(std > 0, std, 1.0)
    x = (chip.input - mean[:, None, None, None]) / std[:, None, None, None]
    return chip.replace(input=x.astype(chip.input.dtype))
