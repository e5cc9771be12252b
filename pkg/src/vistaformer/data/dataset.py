"""
Access to a dataset directory written by `write_dataset`.
"""
import pathlib

import numpy as np

from vistaformer.errors import ConfigurationError, ContractError, FormatError
from vistaformer.data.chip import read_chip
from vistaformer.data.manifest import SPLITS, read_manifest, chip_path
from vistaformer.data.transforms import augment, normalize

__all__ = ['SitsDataset', 'Batch']


class Batch(object):
    def __init__(self, x, labels, sample_ids):
        self.x = x
        self.labels = labels
        self.sample_ids = sample_ids

    def __len__(self):
        return len(self.sample_ids)


class SitsDataset(object):

    """
    Chips are read lazily and cached. Each chip is validated against the manifest when it
    is first read.
    """

    def __init__(self, directory):
        self.directory = pathlib.Path(directory)
        self.manifest = read_manifest(self.directory)
        self._cache = {}

    def __repr__(self):
        return '<SitsDataset {0}>'.format(self.directory)

    @property
    def num_classes(self):
        return self.manifest.num_classes

    def split(self, name):
        if name not in SPLITS:
            raise ConfigurationError('unknown split {0!r}, expected one of {1}'.format(
                name, ', '.join(SPLITS)))
        return list(self.manifest.splits[name])

    def load(self, sample_id):
        if sample_id not in self._cache:
            chip = read_chip(chip_path(self.directory, sample_id))
            m = self.manifest
            if chip.sample_id != sample_id:
                raise FormatError('{0}: chip file holds sample {1}'.format(
                    sample_id, chip.sample_id))
            if chip.shape != (m.channels, m.timesteps, m.height, m.width):
                raise FormatError('{0}: shape {1} does not match the manifest'.format(
                    sample_id, chip.shape))
            self._cache[sample_id] = chip.validate(num_classes=m.num_classes)
        return self._cache[sample_id]

    def chips(self, split):
        for sample_id in self.split(split):
            yield self.load(sample_id)

    def batches(self, split, batch_size, rng=None, augmentation=False, normalized=True):
        """
        Iterate over `split` in batches of at most `batch_size` chips.

        :param rng: `numpy.random.Generator` used to shuffle the split and to draw \
        augmentations. Without it the split is read in manifest order.
        :return: generator of `Batch` objects with `x` (B, C, T, H, W) float32 and \
        `labels` (B, H, W) uint8.
        """
        if batch_size < 1:
            raise ConfigurationError('batch_size must be positive, got {0}'.format(batch_size))
        if augmentation and rng is None:
            raise ContractError('augmentation needs an explicit generator')
        ids = self.split(split)
        if rng is not None:
            ids = [ids[i] for i in rng.permutation(len(ids))]
        for start in range(0, len(ids), batch_size):
            chips = []
            for sample_id in ids[start:start + batch_size]:
                chip = self.load(sample_id)
                if augmentation:
                    chip = augment(chip, rng)
                if normalized:
                    chip = normalize(chip, self.manifest.stats)
                chips.append(chip)
            yield Batch(
                np.stack([c.input for c in chips]),
                np.stack([c.labels for c in chips]),
                [c.sample_id for c in chips])
