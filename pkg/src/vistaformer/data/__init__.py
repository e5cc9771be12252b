"""Synthetic satellite image time series, their file formats and transformations."""
from vistaformer.data.chip import IGNORE, SitsChip, read_chip, write_chip
from vistaformer.data.manifest import DatasetManifest, read_manifest, write_dataset
from vistaformer.data.dataset import SitsDataset
from vistaformer.data.transforms import augment, normalize
from vistaformer.data.synthetic import SyntheticSpec, generate_synthetic_dataset

__all__ = [
    'IGNORE', 'SitsChip', 'read_chip', 'write_chip',
    'DatasetManifest', 'read_manifest', 'write_dataset', 'SitsDataset',
    'augment', 'normalize', 'SyntheticSpec', 'generate_synthetic_dataset']
