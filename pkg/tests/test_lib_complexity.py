import math

import numpy as np
import pytest

from vistaformer.errors import ContractError
from vistaformer.lib import tensor as T
from vistaformer.lib.complexity import *
from vistaformer.models.config import reference_config
from vistaformer.nn.attention import MultiHeadSelfAttention, NeighbourhoodAttention2d

REFERENCE_SHAPE = (4, 10, 60, 32, 32)


def test_formulas():
    assert attn_flops(4, 4, 8) == 7168
    assert na_flops(4, 4, 8, 2) == 4096
    assert conv3d_flops(2, 2, 2, 1) == 16
    assert attn_memory(4, 4, 8) == 3 * 64 + 256
    assert na_memory(4, 4, 8, 2) == 3 * 64 + 64
    assert conv3d_memory(8, 3) == 64 * 27


def test_na_with_full_window_is_attention():
    # K^2 = HW
    assert na_flops(4, 4, 8, 4) == attn_flops(4, 4, 8)


@pytest.mark.parametrize('args', [(0, 4, 8), (4, 4, -1), (4, 4.5, 8)])
def test_formulas_reject_invalid_dims(args):
    with pytest.raises(ContractError):
        attn_flops(*args)


def test_attention_growth():
    assert attn_flops(8, 8, 8) > 4 * attn_flops(4, 4, 8)
    assert na_flops(8, 8, 8, 3) == 4 * na_flops(4, 4, 8, 3)


def test_measured_mhsa_matches_formula(rng):
    layer = MultiHeadSelfAttention(8, 2, rng)
    report = measure_flops(layer, T.tensor(rng.standard_normal((3, 4, 4, 8))))
    assert report.attention == 3 * attn_flops(4, 4, 8)
    assert report.analytic_total == 3 * attn_flops(4, 4, 8)
    assert report.totals['linear'] == 3 * 16 * 8 * 8
    assert report.totals['other'] == 3 * 3 * 2 * 16 * 16


def test_measured_na_matches_formula(rng):
    layer = NeighbourhoodAttention2d(8, 2, 3, rng)
    report = measure_flops(layer, T.tensor(rng.standard_normal((2, 5, 5, 8))))
    assert report.attention == 2 * na_flops(5, 5, 8, 3)
    assert report.analytic_total == report.attention


def test_trace_equals_measure(rng):
    for layer, shape in [
        (MultiHeadSelfAttention(8, 2, rng), (3, 4, 4, 8)),
        (NeighbourhoodAttention2d(8, 2, 5, rng), (2, 3, 6, 8)),
    ]:
        assert trace_flops(layer, shape) == \
            measure_flops(layer, T.tensor(rng.standard_normal(shape)))


def test_model_trace_equals_measure(micro):
    shape = (2, 4, 4, 8, 8)
    assert model_flops(micro, shape) == model_flops(micro, shape, measure=True)
    na = micro.with_attention('na', na_kernel=3)
    assert model_flops(na, shape) == model_flops(na, shape, measure=True)


def test_model_flops_deterministic(micro):
    a, b = model_flops(micro, (1, 4, 4, 8, 8)), model_flops(micro, (1, 4, 4, 8, 8))
    assert a == b
    assert a.total == sum(a.totals.values())
    assert set(a.by_prefix()) == {'stages', 'decoder'}


def test_report_layer_names(micro):
    names = [e.name for e in model_flops(micro, (1, 4, 4, 8, 8)).entries]
    assert 'stages.0.embed.phi_l' in names
    assert 'stages.2.blocks.0.attn' in names
    assert 'decoder.head' in names


def test_reference_flops():
    mhsa = model_flops(reference_config('pastis'), REFERENCE_SHAPE)
    assert mhsa.total == pytest.approx(7.7e9, rel=0.25)
    na = model_flops(reference_config('pastis', attention='na'), REFERENCE_SHAPE)
    assert na.total == pytest.approx(9.82e9, rel=0.25)
    assert 'multiply-accumulate' in mhsa.convention


def _slope(rows, variant, key, x):
    sel = [r for r in rows if r.variant == variant]
    return loglog_slope([x(r) for r in sel], [getattr(r, key) for r in sel])


def test_spatial_scaling():
    cfgs = {
        'mhsa': reference_config('pastis'),
        'na': reference_config('pastis', attention='na')}
    rows = scaling_report(cfgs, 'spatial', [32, 64, 96, 128], seq_len=30)
    assert len(rows) == 8
    assert 1.8 <= _slope(rows, 'mhsa', 'attn_flops', lambda r: r.H * r.W) <= 2.1
    assert 0.9 <= _slope(rows, 'na', 'attn_flops', lambda r: r.H * r.W) <= 1.1


def test_temporal_scaling(tmp_path):
    cfgs = {
        'mhsa': reference_config('pastis'),
        'na': reference_config('pastis', attention='na')}
    rows = scaling_report(cfgs, 'temporal', [15, 30, 45, 60], size=64)
    for variant in cfgs:
        assert _slope(rows, variant, 'total_flops', lambda r: r.T) == \
            pytest.approx(1.0, abs=0.1)

    p = write_scaling_csv(rows, tmp_path / 'scaling.csv')
    lines = p.read_text(encoding='utf8').splitlines()
    assert lines[0] == 'variant,B,C,T,H,W,total_flops,attn_flops'
    assert len(lines) == 9
    assert 'e+' not in lines[1]


def test_scaling_report_axis():
    with pytest.raises(ContractError):
        scaling_report({}, 'depth', [1])


def test_loglog_slope():
    xs = np.array([1.0, 2.0, 4.0])
    assert loglog_slope(xs, xs ** 2) == pytest.approx(2.0)
    assert loglog_slope(xs, 3 * xs) == pytest.approx(1.0)
    assert not math.isnan(loglog_slope([1, 10], [5, 5]))
