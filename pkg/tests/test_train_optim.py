import numpy as np
import pytest

from vistaformer.errors import ContractError, ConfigurationError
from vistaformer.lib import tensor as T
from vistaformer.train.optim import *


@pytest.fixture
def params(rng):
    return [
        T.parameter(rng.standard_normal((3, 2)).astype(np.float32), name='weight'),
        T.parameter(rng.standard_normal(2).astype(np.float32), name='bias'),
    ]


def test_first_adam_step_moves_by_lr(params, rng):
    before = [p.data.copy() for p in params]
    grads = [rng.standard_normal(p.shape) for p in params]
    state = adam_step(params, grads, OptimState(params), 0.01)
    assert state.step == 1
    for p, b, g in zip(params, before, grads):
        assert np.allclose(b - p.data, 0.01 * np.sign(g), atol=1e-6)
        assert p.data.dtype == np.float32


def test_adamw_decays_weights_only(params):
    before = [p.data.copy() for p in params]
    state = OptimState(params, weight_decay=0.5)
    assert state.decay == [True, False]
    adamw_step(params, [None, None], state, 0.1)
    assert np.allclose(params[0].data, before[0] * 0.95)
    assert np.array_equal(params[1].data, before[1])


def test_adamw_without_decay_is_adam(params, rng):
    copies = [T.parameter(p.data.copy()) for p in params]
    s1, s2 = OptimState(params, weight_decay=0), OptimState(copies, weight_decay=0)
    for _ in range(3):
        grads = [rng.standard_normal(p.shape) for p in params]
        adamw_step(params, grads, s1, 0.01)
        adam_step(copies, grads, s2, 0.01)
    for p, c in zip(params, copies):
        assert np.array_equal(p.data, c.data)


def test_mismatch(params):
    state = OptimState(params)
    with pytest.raises(ContractError):
        adam_step(params, [None], state, 0.1)
    with pytest.raises(ContractError):
        adam_step(params, [np.zeros(3), None], state, 0.1)


def test_one_cycle_lr():
    sched = LrSchedule(100)
    assert sched.warm_steps == 10
    assert one_cycle_lr(0, sched) == pytest.approx(4e-4)
    assert one_cycle_lr(10, sched) == pytest.approx(1e-2)
    assert one_cycle_lr(99, sched) == pytest.approx(1e-3)
    lrs = [one_cycle_lr(s, sched) for s in range(100)]
    assert max(lrs) == pytest.approx(1e-2)
    assert lrs[:11] == sorted(lrs[:11])
    assert lrs[10:] == sorted(lrs[10:], reverse=True)
    assert one_cycle_lr(0, LrSchedule(1)) == pytest.approx(4e-4)
    assert one_cycle_lr(5, LrSchedule(10, warm_fraction=0)) < 1e-2


@pytest.mark.parametrize('args', [(-1,), (10, 1.0), (10, -0.1)])
def test_invalid_schedule(args):
    with pytest.raises(ConfigurationError):
        LrSchedule(*args)
