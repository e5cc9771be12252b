"""
Training and evaluation loops.
"""
import csv
import pathlib
import collections

import numpy as np

from vistaformer.errors import ConfigurationError
from vistaformer.lib import tensor as T
from vistaformer.data.chip import IGNORE
from vistaformer.models.checkpoint import write_checkpoint
from vistaformer.train.optim import OptimState, LrSchedule, adamw_step, one_cycle_lr
from vistaformer.train.loss import cross_entropy_masked
from vistaformer.train.metrics import ConfusionMatrix, update_confusion, compute_metrics

__all__ = [
    'TrainConfig', 'HistoryRow', 'EvalResult', 'TrainResult',
    'train_loop', 'evaluate', 'run_trials', 'write_history', 'read_history',
    'CHECKPOINT', 'HISTORY']

CHECKPOINT = 'model.vfck'
HISTORY = 'history.csv'


class TrainConfig(collections.namedtuple('TrainConfig', [
    'epochs',
    'batch_size',
    'seed',
    'lr_start',
    'lr_max',
    'lr_final',
    'warm_fraction',
    'weight_decay',
    'augment',
    'include_background',
    'background_class',
    'class_weights',
])):

    def __new__(cls,
                epochs=30,
                batch_size=32,
                seed=0,
                lr_start=4e-4,
                lr_max=1e-2,
                lr_final=1e-3,
                warm_fraction=0.1,
                weight_decay=0.01,
                augment=True,
                include_background=True,
                background_class=0,
                class_weights=None):
        if epochs < 0 or batch_size < 1:
            raise ConfigurationError('epochs must be >= 0 and batch_size >= 1')
        return super(TrainConfig, cls).__new__(
            cls, epochs, batch_size, seed, lr_start, lr_max, lr_final, warm_fraction,
            weight_decay, augment, include_background, background_class,
            None if class_weights is None else tuple(class_weights))

    @property
    def exclude(self):
        """Classes mapped to the ignore label in loss and metrics."""
        return () if self.include_background else (self.background_class,)

    def schedule(self, total_steps):
        return LrSchedule(
            total_steps,
            warm_fraction=self.warm_fraction,
            lr_start=self.lr_start,
            lr_max=self.lr_max,
            lr_final=self.lr_final)


HistoryRow = collections.namedtuple('HistoryRow', 'epoch train_loss val_oA val_mIoU lr')
EvalResult = collections.namedtuple('EvalResult', 'metrics confusion predictions')
TrainResult = collections.namedtuple('TrainResult', 'history checkpoint')


def evaluate(model, dataset, split, batch_size=32, exclude=(), return_predictions=False,
             log=None):
    """
    Score `model` in eval mode on a split, accumulating one confusion matrix.

    :return: `EvalResult`; `predictions` maps sample ids to (H, W) class grids if \
    `return_predictions` is set.
    :raises ConfigurationError: if the split is empty.
    """
    if not dataset.split(split):
        raise ConfigurationError('split {0!r} of {1} is empty'.format(split, dataset))
    K = dataset.num_classes
    cm, predictions = ConfusionMatrix(K), collections.OrderedDict()
    model.eval()
    with T.no_grad():
        for batch in dataset.batches(split, batch_size):
            pred = np.argmax(model(T.tensor(batch.x)).data, axis=1)
            if exclude:
                labels = np.where(np.isin(batch.labels, exclude), IGNORE, batch.labels)
            else:
                labels = batch.labels
            update_confusion(cm, pred, labels)
            if return_predictions:
                predictions.update(zip(batch.sample_ids, pred.astype(np.uint8)))
    metrics = compute_metrics(cm, exclude=exclude)
    if log:
        log.info('{0}: oA {1:.4f} mIoU {2:.4f}'.format(split, metrics.oA, metrics.mIoU))
    return EvalResult(metrics, cm, predictions if return_predictions else None)


def write_history(rows, path):
    path = pathlib.Path(path)
    with path.open('w', encoding='utf8', newline='') as fp:
        writer = csv.writer(fp, lineterminator='\n')
        writer.writerow(HistoryRow._fields)
        for row in rows:
            writer.writerow([row.epoch] + [repr(float(v)) for v in row[1:]])
    return path


def read_history(path):
    with pathlib.Path(path).open(encoding='utf8', newline='') as fp:
        return [
            HistoryRow(int(r['epoch']), *(float(r[k]) for k in HistoryRow._fields[1:]))
            for r in csv.DictReader(fp)]


def train_loop(model, dataset, cfg, out=None, log=None):
    """
    Train `model` on the train split of `dataset` with AdamW and the one-cycle schedule,
    scoring the val split after every epoch.

    Training is deterministic under `cfg.seed`: the seed drives shuffling, augmentation
    and dropout.

    :param out: Directory receiving `history.csv` and the final checkpoint `model.vfck`. \
    With zero epochs only the checkpoint of the initial model is written.
    :return: `TrainResult`
    :raises ConfigurationError: if the train split is empty.
    """
    n_train = len(dataset.split('train'))
    if not n_train:
        raise ConfigurationError('the train split of {0} is empty'.format(dataset))
    has_val = bool(dataset.split('val'))
    rng = np.random.default_rng([cfg.seed, 0])
    model.set_rng(np.random.default_rng([cfg.seed, 1]))
    params = model.parameters()
    state = OptimState(params, weight_decay=cfg.weight_decay)
    steps_per_epoch = -(-n_train // cfg.batch_size)
    sched = cfg.schedule(cfg.epochs * steps_per_epoch)

    history, step, lr = [], 0, cfg.lr_start
    for epoch in range(1, cfg.epochs + 1):
        losses = []
        for batch in dataset.batches(
                'train', cfg.batch_size, rng=rng, augmentation=cfg.augment):
            lr = one_cycle_lr(step, sched)
            model.train(True)
            res = cross_entropy_masked(
                model(T.tensor(batch.x)),
                batch.labels,
                class_weights=cfg.class_weights,
                exclude=cfg.exclude)
            if res.all_ignored:
                if log:
                    log.warning('epoch {0}: batch without scored pixels'.format(epoch))
            else:
                model.zero_grad()
                T.backward(res.loss)
                adamw_step(params, [p.grad for p in params], state, lr)
                losses.append(float(res))
            step += 1
        if has_val:
            metrics = evaluate(
                model, dataset, 'val', batch_size=cfg.batch_size, exclude=cfg.exclude).metrics
            val = metrics.oA, metrics.mIoU
        else:
            val = float('nan'), float('nan')
        row = HistoryRow(
            epoch, float(np.mean(losses)) if losses else float('nan'), val[0], val[1], lr)
        history.append(row)
        if log:
            log.info('epoch {0.epoch}: loss {0.train_loss:.4f} val oA {0.val_oA:.4f} '
                     'mIoU {0.val_mIoU:.4f} lr {0.lr:.5f}'.format(row))
    model.eval()
    model.zero_grad()

    checkpoint = None
    if out:
        out = pathlib.Path(out)
        out.mkdir(parents=True, exist_ok=True)
        if history:
            write_history(history, out / HISTORY)
        checkpoint = write_checkpoint(model, out / CHECKPOINT, log=log)
    return TrainResult(history, checkpoint)


def run_trials(build, dataset, cfg, trials=3, out=None, log=None):
    """
    Train `trials` models with seeds `cfg.seed`, `cfg.seed + 1`, ...

    :param build: callable returning a fresh model for a seed.
    :return: pair (list of final `HistoryRow` per trial, `OrderedDict` mapping \
    `val_oA` and `val_mIoU` to (mean, std)).
    """
    finals = []
    for i in range(trials):
        tcfg = cfg._replace(seed=cfg.seed + i)
        res = train_loop(
            build(tcfg.seed),
            dataset,
            tcfg,
            out=pathlib.Path(out) / 'trial{0}'.format(i + 1) if out and trials > 1 else out,
            log=log)
        if res.history:
            finals.append(res.history[-1])
    summary = collections.OrderedDict()
    for key in ['val_oA', 'val_mIoU']:
        values = np.array([getattr(r, key) for r in finals], dtype=float)
        summary[key] = (float(values.mean()), float(values.std())) if values.size \
            else (float('nan'), float('nan'))
    return finals, summary
