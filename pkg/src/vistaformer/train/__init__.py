"""Optimization and evaluation harness."""
from vistaformer.train.optim import OptimState, LrSchedule, adamw_step, one_cycle_lr
from vistaformer.train.loss import cross_entropy_masked
from vistaformer.train.metrics import ConfusionMatrix, update_confusion, compute_metrics
from vistaformer.train.loop import TrainConfig, train_loop, evaluate, run_trials

__all__ = [
    'OptimState', 'LrSchedule', 'adamw_step', 'one_cycle_lr', 'cross_entropy_masked',
    'ConfusionMatrix', 'update_confusion', 'compute_metrics',
    'TrainConfig', 'train_loop', 'evaluate', 'run_trials']
