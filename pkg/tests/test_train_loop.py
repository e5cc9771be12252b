import math
import logging

import numpy as np
import pytest

from vistaformer.errors import ConfigurationError
from vistaformer.data.dataset import SitsDataset
from vistaformer.models.vistaformer import build_model
from vistaformer.models.checkpoint import load_model
from vistaformer.train.loop import *


@pytest.fixture
def dataset(toy_dataset):
    return SitsDataset(toy_dataset)


@pytest.fixture
def cfg():
    return TrainConfig(epochs=2, batch_size=4, seed=5)


def test_train_config():
    assert TrainConfig().exclude == ()
    assert TrainConfig(include_background=False, background_class=2).exclude == (2,)
    assert TrainConfig(class_weights=[1, 2]).class_weights == (1, 2)
    with pytest.raises(ConfigurationError):
        TrainConfig(batch_size=0)
    assert TrainConfig().schedule(100).warm_steps == 10


def test_train_loop(micro, dataset, cfg, tmp_path):
    model = build_model(micro, seed=0)
    before = [p.data.copy() for p in model.parameters()]
    res = train_loop(model, dataset, cfg, out=tmp_path, log=logging.getLogger(__name__))
    assert [r.epoch for r in res.history] == [1, 2]
    assert all(math.isfinite(r.train_loss) for r in res.history)
    assert all(0 <= r.val_oA <= 1 for r in res.history)
    assert not model.training
    assert any(not np.array_equal(b, p.data) for b, p in zip(before, model.parameters()))

    assert read_history(tmp_path / HISTORY) == res.history
    assert res.checkpoint == tmp_path / CHECKPOINT
    restored = load_model(res.checkpoint)
    for a, b in zip(restored.parameters(), model.parameters()):
        assert np.array_equal(a.data, b.data)


def test_training_is_seeded(micro, dataset, cfg):
    def run(seed):
        model = build_model(micro, seed=0)
        return train_loop(model, dataset, cfg._replace(seed=seed)).history, model

    (h1, m1), (h2, m2) = run(5), run(5)
    assert h1 == h2
    assert all(np.array_equal(a.data, b.data) for a, b in zip(m1.parameters(), m2.parameters()))
    assert run(6)[0] != h1


def test_zero_epochs(micro, dataset, tmp_path):
    res = train_loop(build_model(micro), dataset, TrainConfig(epochs=0), out=tmp_path)
    assert res.history == []
    assert (tmp_path / CHECKPOINT).exists()
    assert not (tmp_path / HISTORY).exists()


def test_evaluate(micro, dataset):
    model = build_model(micro)
    res = evaluate(model, dataset, 'val', batch_size=1, return_predictions=True)
    assert res.confusion.total > 0
    assert list(res.predictions) == dataset.split('val')
    assert res.predictions[dataset.split('val')[0]].shape == (8, 8)
    assert evaluate(model, dataset, 'val').confusion == res.confusion

    excluded = evaluate(model, dataset, 'val', exclude=(0,))
    assert excluded.confusion.counts[0].sum() == 0
    assert math.isnan(excluded.metrics.iou[0])
    with pytest.raises(ConfigurationError):
        evaluate(model, dataset, 'test')


def test_run_trials(micro, dataset, tmp_path):
    finals, summary = run_trials(
        lambda seed: build_model(micro, seed=seed),
        dataset,
        TrainConfig(epochs=1, batch_size=8, seed=1),
        trials=2,
        out=tmp_path)
    assert len(finals) == 2
    assert (tmp_path / 'trial1' / CHECKPOINT).exists()
    assert (tmp_path / 'trial2' / HISTORY).exists()
    assert list(summary) == ['val_oA', 'val_mIoU']
    mean, std = summary['val_oA']
    assert mean == pytest.approx(np.mean([r.val_oA for r in finals]))
    assert std >= 0


def test_history(tmp_path):
    rows = [HistoryRow(1, 0.5, 0.25, 0.125, 1e-3), HistoryRow(2, float('nan'), 0.5, 0.25, 0.0)]
    res = read_history(write_history(rows, tmp_path / HISTORY))
    assert res[0] == rows[0]
    assert math.isnan(res[1].train_loss)


def test_evaluating_checkpoint_reproduces_history(micro, dataset, cfg, tmp_path):
    res = train_loop(build_model(micro, seed=0), dataset, cfg, out=tmp_path)
    last = read_history(tmp_path / HISTORY)[-1]
    metrics = evaluate(
        load_model(res.checkpoint), dataset, 'val', batch_size=cfg.batch_size).metrics
    assert (metrics.oA, metrics.mIoU) == (last.val_oA, last.val_mIoU)
