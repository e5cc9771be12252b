import numpy as np
import pytest

from vistaformer.errors import ConfigurationError, FormatError
from vistaformer.data.manifest import *
from vistaformer.data.manifest import chip_path


def _manifest(**kw):
    kw.setdefault('splits', {'train': ['a', 'b'], 'val': ['c']})
    return DatasetManifest(
        num_classes=3, channels=2, timesteps=4, height=8, width=8,
        mean=[0.1, 0.2], std=[1.0, 0.5], **kw)


def test_manifest(tmp_path):
    m = _manifest(seed=7, cloud_prob=0.1)
    assert m.sample_ids == ['a', 'b', 'c']
    assert m.splits['test'] == []
    p = m.write(tmp_path / MANIFEST)
    assert '[splits]' in p.read_text(encoding='utf8')

    res = read_manifest(tmp_path)
    assert res.splits == m.splits
    assert (res.seed, res.cloud_prob, res.num_classes) == (7, 0.1, 3)
    assert np.array_equal(res.mean, m.mean) and np.array_equal(res.std, m.std)


def test_splits_must_be_disjoint():
    with pytest.raises(ConfigurationError):
        _manifest(splits={'train': ['a', 'b'], 'val': ['b']})


def test_stats_per_channel():
    with pytest.raises(ConfigurationError):
        DatasetManifest(3, 2, 4, 8, 8, {}, mean=[0.0], std=[1.0, 1.0])


@pytest.mark.parametrize('text', [
    'no sections',
    '[dataset]\nversion = 1\n',
    '[dataset]\nversion = 2\n',
    '[dataset]\nversion = 1\nnum_classes = three\n',
])
def test_invalid_manifest(tmp_path, text):
    p = tmp_path / MANIFEST
    p.write_text(text, encoding='utf8')
    with pytest.raises(FormatError):
        read_manifest(p)


def test_write_dataset(tmp_path, rng):
    from vistaformer.data.chip import SitsChip, read_chip

    chips = [
        SitsChip(
            rng.random((2, 4, 8, 8)).astype(np.float32),
            np.zeros((8, 8), dtype=np.uint8),
            None,
            sid)
        for sid in 'abc']
    out = write_dataset(_manifest(), chips, tmp_path / 'ds')
    assert (out / MANIFEST).exists()
    assert chip_path(out, 'b').name == 'b.sits'
    assert read_chip(chip_path(out, 'c')).equals(chips[2])
