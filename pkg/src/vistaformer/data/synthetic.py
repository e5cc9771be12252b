"""
Synthetic satellite image time series.

Each chip partitions its grid into contiguous regions grown from random seed pixels. A
region's class selects a smooth temporal profile per channel (a cubic Bezier curve with
per-class control points), shifted by a per-chip phase jitter and perturbed by noise.
Cloud occlusions overwrite random patches of single time steps with bright, low-contrast
values and are recorded in the cloud mask. Class frequencies are skewed: a background
class covers a configurable fraction of the regions, the remaining classes follow a
power law.
"""
import collections

import numpy as np

from vistaformer.errors import ConfigurationError
from vistaformer.data.chip import SitsChip, IGNORE
from vistaformer.data.manifest import DatasetManifest, write_dataset

__all__ = [
    'SyntheticSpec', 'class_profiles', 'grow_regions', 'generate_chip',
    'generate_synthetic_dataset']

NOISE = 0.03
CLOUD_LEVEL = 0.85
CLOUD_NOISE = 0.02
PHASE_JITTER = 0.08


class SyntheticSpec(collections.namedtuple('SyntheticSpec', [
    'n_samples',
    'num_classes',
    'channels',
    'timesteps',
    'height',
    'width',
    'cloud_prob',
    'seed',
    'background_fraction',
    'skew',
    'void_prob',
    'val_fraction',
    'test_fraction',
])):

    def __new__(cls,
                n_samples=250,
                num_classes=5,
                channels=4,
                timesteps=12,
                height=32,
                width=32,
                cloud_prob=0.15,
                seed=0,
                background_fraction=0.4,
                skew=2.0,
                void_prob=0.0,
                val_fraction=0.2,
                test_fraction=0.0):
        return super(SyntheticSpec, cls).__new__(
            cls, n_samples, num_classes, channels, timesteps, height, width, cloud_prob,
            seed, background_fraction, skew, void_prob, val_fraction, test_fraction)

    def validate(self):
        if self.num_classes < 2 or self.num_classes > IGNORE:
            raise ConfigurationError(
                'num_classes must be in [2, {0}], got {1}'.format(IGNORE, self.num_classes))
        for name in ['channels', 'timesteps', 'n_samples']:
            if getattr(self, name) < 1:
                raise ConfigurationError('{0} must be positive'.format(name))
        for name in ['height', 'width']:
            if getattr(self, name) < 8:
                raise ConfigurationError('{0} must be at least 8, got {1}'.format(
                    name, getattr(self, name)))
        for name in ['cloud_prob', 'background_fraction', 'void_prob']:
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigurationError('{0} must be a probability'.format(name))
        if self.val_fraction < 0 or self.test_fraction < 0 \
                or self.val_fraction + self.test_fraction >= 1:
            raise ConfigurationError('val_fraction + test_fraction must be in [0, 1)')
        return self

    @property
    def class_probs(self):
        """Probability of each class to be assigned to a region."""
        weights = np.arange(1, self.num_classes, dtype=float) ** -self.skew
        probs = np.concatenate([
            [self.background_fraction],
            (1 - self.background_fraction) * weights / weights.sum()])
        return probs / probs.sum()


def class_profiles(spec):
    """Bezier control points (K, C, 4) in [0.1, 0.8], fixed by the dataset seed."""
    rng = np.random.default_rng([spec.seed, 0])
    return rng.uniform(0.1, 0.8, size=(spec.num_classes, spec.channels, 4))


def bezier(control, t):
    """Evaluate cubic Bezier curves with control points (..., 4) at times t in [0, 1]."""
    t = np.clip(t, 0, 1)
    basis = np.stack([(1 - t) ** 3, 3 * t * (1 - t) ** 2, 3 * t ** 2 * (1 - t), t ** 3])
    return np.tensordot(control, basis, axes=(-1, 0))


def grow_regions(rng, height, width, n_regions):
    """
    Partition the grid into `n_regions` non-empty 4-connected regions by growing them from
    random seed pixels, expanding a randomly chosen frontier pixel at each step.
    """
    regions = np.full((height, width), -1, dtype=int)
    frontier = []

    def claim(row, col, r):
        regions[row, col] = r
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nr, nc = row + dr, col + dc
            if 0 <= nr < height and 0 <= nc < width and regions[nr, nc] < 0:
                frontier.append((nr, nc, r))

    for r, s in enumerate(rng.choice(height * width, size=n_regions, replace=False)):
        claim(int(s) // width, int(s) % width, r)
    while frontier:
        i = int(rng.integers(len(frontier)))
        frontier[i], frontier[-1] = frontier[-1], frontier[i]
        row, col, r = frontier.pop()
        if regions[row, col] < 0:
            claim(row, col, r)
    return regions


def _boundaries(regions):
    res = np.zeros(regions.shape, dtype=bool)
    res[1:, :] |= regions[1:, :] != regions[:-1, :]
    res[:, 1:] |= regions[:, 1:] != regions[:, :-1]
    return res


def generate_chip(spec, index, profiles=None):
    """Generate sample `index`, deterministically from the dataset seed and the index."""
    rng = np.random.default_rng([spec.seed, 1, index])
    profiles = class_profiles(spec) if profiles is None else profiles
    C, T, H, W = spec.channels, spec.timesteps, spec.height, spec.width

    regions = grow_regions(rng, H, W, int(rng.integers(4, 9)))
    region_classes = rng.choice(spec.num_classes, size=regions.max() + 1, p=spec.class_probs)
    labels = region_classes[regions].astype(np.uint8)

    t = np.linspace(0, 1, T) + rng.uniform(-PHASE_JITTER, PHASE_JITTER)
    curves = bezier(profiles, t)  # (K, C, T)
    offsets = rng.uniform(-NOISE, NOISE, size=(region_classes.size, C))
    x = np.transpose(curves[labels], (2, 3, 0, 1)) \
        + np.transpose(offsets[regions], (2, 0, 1))[:, None] \
        + rng.normal(0, NOISE, size=(C, T, H, W))

    mask = np.zeros((T, H, W), dtype=bool)
    for step in np.flatnonzero(rng.random(T) < spec.cloud_prob):
        h, w = int(rng.integers(H // 4, H // 2 + 1)), int(rng.integers(W // 4, W // 2 + 1))
        r0, c0 = int(rng.integers(0, H - h + 1)), int(rng.integers(0, W - w + 1))
        mask[step, r0:r0 + h, c0:c0 + w] = True
        x[:, step, r0:r0 + h, c0:c0 + w] = \
            CLOUD_LEVEL + rng.normal(0, CLOUD_NOISE, size=(C, h, w))

    if spec.void_prob:
        labels[_boundaries(regions) & (rng.random((H, W)) < spec.void_prob)] = IGNORE

    return SitsChip(
        np.clip(x, 0, 1).astype(np.float32), labels, mask, 'chip{0:05d}'.format(index))


def split_ids(spec, ids):
    """Shuffle `ids` under the seed and assign them to the train, val and test splits."""
    rng = np.random.default_rng([spec.seed, 2])
    ids = [ids[i] for i in rng.permutation(len(ids))]
    n_test = int(round(len(ids) * spec.test_fraction))
    n_val = int(round(len(ids) * spec.val_fraction))
    return collections.OrderedDict([
        ('train', sorted(ids[n_val + n_test:])),
        ('val', sorted(ids[n_test:n_test + n_val])),
        ('test', sorted(ids[:n_test])),
    ])


def channel_stats(chips):
    """Per-channel mean and standard deviation over all pixels and time steps."""
    total, sq, n = 0.0, 0.0, 0
    for chip in chips:
        x = chip.input.astype(np.float64)
        total = total + x.sum(axis=(1, 2, 3))
        sq = sq + (x * x).sum(axis=(1, 2, 3))
        n += x[0].size
    if not n:
        raise ConfigurationError('cannot compute statistics of an empty split')
    mean = total / n
    return mean, np.sqrt(np.maximum(sq / n - mean * mean, 0))


def generate_synthetic_dataset(spec, out, log=None):
    """
    Write a dataset directory: `manifest.ini` plus one chip file per sample in `chips/`.

    Normalization statistics are computed from the train split only.

    :return: `DatasetManifest`
    """
    spec.validate()
    profiles = class_profiles(spec)
    chips = [generate_chip(spec, i, profiles=profiles) for i in range(spec.n_samples)]
    splits = split_ids(spec, [c.sample_id for c in chips])
    train = set(splits['train'])
    mean, std = channel_stats(c for c in chips if c.sample_id in train)
    manifest = DatasetManifest(
        num_classes=spec.num_classes,
        channels=spec.channels,
        timesteps=spec.timesteps,
        height=spec.height,
        width=spec.width,
        seed=spec.seed,
        cloud_prob=spec.cloud_prob,
        background_fraction=spec.background_fraction,
        splits=splits,
        mean=mean,
        std=std)
    write_dataset(manifest, chips, out)
    if log:
        log.info('wrote {0} chips to {1} (train {2}, val {3}, test {4})'.format(
            len(chips), out, *(len(splits[k]) for k in ['train', 'val', 'test'])))
    return manifest
