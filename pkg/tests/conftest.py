import numpy as np
import pytest

from vistaformer.lib import tensor as T
from vistaformer.models.config import micro_config
from vistaformer.data.synthetic import SyntheticSpec, generate_synthetic_dataset

TOY = SyntheticSpec(
    n_samples=8,
    num_classes=3,
    channels=4,
    timesteps=4,
    height=8,
    width=8,
    cloud_prob=0.2,
    seed=3,
    val_fraction=0.25,
    test_fraction=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def float64():
    with T.precision('float64'):
        yield


@pytest.fixture
def micro():
    return micro_config()


@pytest.fixture
def toy_spec():
    return TOY


@pytest.fixture(scope='session')
def toy_dataset(tmp_path_factory):
    """A dataset directory matching the inputs and classes of the micro model."""
    out = tmp_path_factory.mktemp('toy')
    generate_synthetic_dataset(TOY, out)
    return out
