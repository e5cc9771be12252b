import pytest

from vistaformer.errors import ConfigurationError
from vistaformer.models.config import *


def test_reference_config():
    cfg = reference_config()
    assert (cfg.in_channels, cfg.num_classes, cfg.max_seq_len) == (10, 20, 60)
    assert cfg.attention == AttentionKind.mhsa
    assert [s.embed_dim for s in cfg.stages] == [32, 64, 128]
    assert [s.num_heads for s in cfg.stages] == [2, 4, 8]
    assert cfg.validate() is cfg
    assert cfg.spatial_factor == 8

    mtlcc = reference_config('mtlcc')
    assert (mtlcc.in_channels, mtlcc.num_classes, mtlcc.max_seq_len) == (13, 18, 46)

    with pytest.raises(ConfigurationError):
        reference_config('sen12')


def test_with_attention():
    na = reference_config().with_attention('na')
    assert na.attention == AttentionKind.na
    assert na.na_kernel == 13
    assert tuple(s.num_heads for s in na.stages) == NA_HEADS
    back = na.with_attention(AttentionKind.mhsa)
    assert back == reference_config()
    assert reference_config().with_attention('na', na_kernel=7).na_kernel == 7


def test_with_attention_custom_stages(micro):
    assert not is_reference_geometry(micro.stages)
    assert is_reference_geometry(reference_config('mtlcc', 'na').stages)
    na = micro.with_attention('na')
    assert [s.num_heads for s in na.stages] == [2, 2, 4]
    assert na.with_attention('mhsa') == micro
    assert [s.num_heads for s in micro.with_attention('na', num_heads=(1, 1, 2)).stages] == \
        [1, 1, 2]
    with pytest.raises(ConfigurationError):
        micro.with_attention('na', num_heads=(1, 2))


@pytest.mark.parametrize('schedule,lens', [
    ('default', [60, 30, 15]),
    ('first_stage_halves_t', [30, 15, 15]),
    ('none', [60, 60, 60]),
])
def test_temporal_schedules(schedule, lens):
    cfg = reference_config()._replace(temporal_schedule=TemporalSchedule.from_string(schedule))
    assert cfg.stage_seq_lens() == lens
    assert cfg.stage_geometry()[0][0][1:] == (2, 2)


def test_string_options():
    cfg = ModelConfig(4, 3, 8, attention='na', decoder_reduce='maxpool')
    assert cfg.attention == AttentionKind.na
    assert cfg.decoder_reduce == DecoderReduce.maxpool
    with pytest.raises(ConfigurationError):
        ModelConfig(4, 3, 8, attention='swin')


@pytest.mark.parametrize('kw', [
    dict(num_classes=0),
    dict(max_seq_len=1),
    dict(dropout_rate=1.0),
    dict(drop_path_rate=-0.1),
    dict(attention='na', na_kernel=4),
    dict(stages=[StageConfig(6, (1, 2, 2), num_heads=4)]),
    dict(stages=[StageConfig(8, (1, 2, 2), stride=(1, 1, 1))]),
    dict(stages=[]),
])
def test_validate(kw):
    with pytest.raises(ConfigurationError):
        micro_config(**kw).validate()


def test_error_names_stage():
    cfg = micro_config(stages=[
        StageConfig(8, (1, 2, 2)), StageConfig(6, (2, 2, 2), num_heads=4)])
    with pytest.raises(ConfigurationError, match='stage 2'):
        cfg.validate()


def test_overlapping_temporal_patches():
    s = StageConfig(8, (3, 2, 2), stride=(1, 2, 2))
    assert s.stride == (1, 2, 2)
    cfg = micro_config(stages=[s], temporal_schedule='none')
    assert cfg.validate().stage_seq_lens() == [2]


def test_asdict():
    cfg = reference_config(attention='na')._replace(gated_conv=False)
    d = cfg.asdict()
    assert d['attention'] == 'na'
    assert d['stages'][0]['patch'] == (1, 2, 2)
    assert ModelConfig.fromdict(d) == cfg
