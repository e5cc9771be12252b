import numpy as np
import pytest

from vistaformer.errors import ConfigurationError
from vistaformer.data.chip import IGNORE
from vistaformer.data.manifest import read_manifest
from vistaformer.data.dataset import SitsDataset
from vistaformer.data.synthetic import *
from vistaformer.data.synthetic import bezier, split_ids, channel_stats


def test_class_probs():
    spec = SyntheticSpec(num_classes=5, background_fraction=0.4)
    probs = spec.class_probs
    assert probs.sum() == pytest.approx(1)
    assert probs[0] == pytest.approx(0.4)
    assert list(probs[1:]) == sorted(probs[1:], reverse=True)


@pytest.mark.parametrize('kw', [
    dict(num_classes=1),
    dict(num_classes=256),
    dict(height=4),
    dict(n_samples=0),
    dict(cloud_prob=1.5),
    dict(val_fraction=0.6, test_fraction=0.4),
])
def test_validate(kw):
    with pytest.raises(ConfigurationError):
        SyntheticSpec(**kw).validate()


def test_bezier():
    control = np.array([[0.0, 0.0, 1.0, 1.0]])
    assert np.allclose(bezier(control, np.array([0.0, 1.0])), [[0.0, 1.0]])
    assert bezier(control, np.array([0.5]))[0, 0] == pytest.approx(0.5)


def test_grow_regions(rng):
    regions = grow_regions(rng, 10, 12, 5)
    assert regions.shape == (10, 12)
    assert set(np.unique(regions)) == set(range(5))


def test_generate_chip(toy_spec):
    chip = generate_chip(toy_spec, 2)
    assert chip.shape == (4, 4, 8, 8)
    assert chip.sample_id == 'chip00002'
    assert chip.input.dtype == np.float32
    assert chip.input.min() >= 0 and chip.input.max() <= 1
    assert chip.labels.max() < toy_spec.num_classes
    assert chip.cloud_mask.shape == (4, 8, 8)
    assert generate_chip(toy_spec, 2).equals(chip)
    assert not generate_chip(toy_spec, 3).equals(chip)


def test_clouds_and_void(toy_spec):
    cloudy = toy_spec._replace(cloud_prob=1.0, void_prob=1.0)
    chip = generate_chip(cloudy, 0)
    assert chip.cloud_mask.any(axis=(1, 2)).all()
    assert (chip.labels == IGNORE).any()
    clear = generate_chip(toy_spec._replace(cloud_prob=0.0), 0)
    assert not clear.cloud_mask.any()


def test_split_ids(toy_spec):
    ids = ['chip{0:05d}'.format(i) for i in range(20)]
    splits = split_ids(toy_spec._replace(val_fraction=0.2, test_fraction=0.1), ids)
    assert [len(splits[k]) for k in ['train', 'val', 'test']] == [14, 4, 2]
    assert sorted(sum(splits.values(), [])) == ids


def test_channel_stats(toy_spec):
    chips = [generate_chip(toy_spec, i) for i in range(3)]
    mean, std = channel_stats(chips)
    x = np.concatenate([c.input for c in chips], axis=1).astype(np.float64)
    assert np.allclose(mean, x.mean(axis=(1, 2, 3)))
    assert np.allclose(std, x.std(axis=(1, 2, 3)))
    with pytest.raises(ConfigurationError):
        channel_stats([])


def test_generate_dataset(toy_dataset, toy_spec, tmp_path):
    m = read_manifest(toy_dataset)
    assert (m.num_classes, m.channels, m.timesteps) == (3, 4, 4)
    assert [len(m.splits[k]) for k in ['train', 'val', 'test']] == [6, 2, 0]

    # Same seed, same bytes.
    generate_synthetic_dataset(toy_spec, tmp_path)
    for sid in m.sample_ids:
        name = 'chips/{0}.sits'.format(sid)
        assert (tmp_path / name).read_bytes() == (toy_dataset / name).read_bytes()


def test_train_split_is_standardized(toy_dataset):
    ds = SitsDataset(toy_dataset)
    x = np.concatenate([b.x for b in ds.batches('train', 4)], axis=0)
    assert np.allclose(x.mean(axis=(0, 2, 3, 4)), 0, atol=1e-3)
    assert np.allclose(x.std(axis=(0, 2, 3, 4)), 1, atol=1e-2)


def test_class_frequency_skew():
    spec = SyntheticSpec()
    profiles = class_profiles(spec)
    counts = np.zeros(spec.num_classes)
    for i in range(spec.n_samples):
        labels = generate_chip(spec, i, profiles=profiles).labels
        counts += np.bincount(labels.ravel(), minlength=spec.num_classes)
    freq = counts / counts.sum()
    assert freq[0] >= 0.3
    assert freq.min() <= 0.05
