"""
Dataset directories.

A dataset directory holds ``manifest.ini`` and one chip file per sample in ``chips/``.
The manifest is an INI file with the sections

``[dataset]``
    version, num_classes, channels, timesteps, height, width, seed, cloud_prob,
    background_fraction
``[splits]``
    train, val, test: whitespace-separated sample ids
``[stats]``
    mean, std: whitespace-separated per-channel floats of the train split
"""
import pathlib
import configparser

import numpy as np

from vistaformer.errors import ConfigurationError, FormatError
from vistaformer.util import safe_overwrite
from vistaformer.data.chip import write_chip

__all__ = ['MANIFEST', 'SPLITS', 'DatasetManifest', 'read_manifest', 'write_dataset']

MANIFEST = 'manifest.ini'
CHIPS = 'chips'
SPLITS = ('train', 'val', 'test')
VERSION = 1
DATASET_KEYS = [
    ('num_classes', int),
    ('channels', int),
    ('timesteps', int),
    ('height', int),
    ('width', int),
    ('seed', int),
    ('cloud_prob', float),
    ('background_fraction', float),
]


class DatasetManifest(object):
    def __init__(self, num_classes, channels, timesteps, height, width, splits, mean, std,
                 seed=0, cloud_prob=0.0, background_fraction=0.0, version=VERSION):
        self.version = version
        self.num_classes = num_classes
        self.channels = channels
        self.timesteps = timesteps
        self.height = height
        self.width = width
        self.seed = seed
        self.cloud_prob = cloud_prob
        self.background_fraction = background_fraction
        self.splits = {name: list(splits.get(name, [])) for name in SPLITS}
        self.mean = np.asarray(mean, dtype=np.float64)
        self.std = np.asarray(std, dtype=np.float64)
        self.validate()

    def validate(self):
        seen = set()
        for name in SPLITS:
            ids = set(self.splits[name])
            if ids & seen:
                raise ConfigurationError('splits overlap in {0}: {1}'.format(
                    name, sorted(ids & seen)[:3]))
            seen |= ids
        if self.mean.shape != (self.channels,) or self.std.shape != (self.channels,):
            raise ConfigurationError('stats must have one value per channel ({0})'.format(
                self.channels))
        return self

    @property
    def stats(self):
        return self.mean, self.std

    @property
    def sample_ids(self):
        return [i for name in SPLITS for i in self.splits[name]]

    def write(self, path):
        parser = configparser.ConfigParser()
        parser['dataset'] = {'version': str(self.version)}
        for key, _ in DATASET_KEYS:
            parser['dataset'][key] = repr(getattr(self, key))
        parser['splits'] = {name: ' '.join(self.splits[name]) for name in SPLITS}
        parser['stats'] = {
            name: ' '.join(repr(float(v)) for v in getattr(self, name))
            for name in ['mean', 'std']}
        with safe_overwrite(path) as tmp:
            with tmp.open('w', encoding='utf8') as fp:
                parser.write(fp)
        return path


def read_manifest(path):
    """Read a manifest, given the path of the file or of its dataset directory."""
    path = pathlib.Path(path)
    if path.is_dir():
        path = path / MANIFEST
    parser = configparser.ConfigParser()
    try:
        with path.open(encoding='utf8') as fp:
            parser.read_file(fp)
    except configparser.Error as e:
        raise FormatError('{0}: {1}'.format(path, e))
    try:
        version = parser.getint('dataset', 'version')
        if version != VERSION:
            raise FormatError('{0}: unsupported manifest version {1}'.format(path, version))
        kw = {key: type_(parser.get('dataset', key)) for key, type_ in DATASET_KEYS}
        splits = {
            name: parser.get('splits', name, fallback='').split() for name in SPLITS}
        stats = {
            name: [float(v) for v in parser.get('stats', name).split()]
            for name in ['mean', 'std']}
    except (configparser.Error, ValueError) as e:
        raise FormatError('{0}: {1}'.format(path, e))
    return DatasetManifest(splits=splits, version=version, **dict(kw, **stats))


def write_dataset(manifest, chips, out):
    """Write `chips` and `manifest` to the dataset directory `out`."""
    out = pathlib.Path(out)
    chip_dir = out / CHIPS
    chip_dir.mkdir(parents=True, exist_ok=True)
    for chip in chips:
        write_chip(chip, chip_path(out, chip.sample_id))
    manifest.write(out / MANIFEST)
    return out


def chip_path(directory, sample_id):
    return pathlib.Path(directory) / CHIPS / '{0}.sits'.format(sample_id)
