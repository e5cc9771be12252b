import pytest

from vistaformer.errors import ConfigurationError
from vistaformer.models.config import AttentionKind, NA_HEADS
from vistaformer.config import *


def test_get_config(tmp_path):
    p = tmp_path / 'run.cfg'
    p.write_text('[train]\nseed = 5\n', encoding='utf8')
    assert get_config(p)['train.seed'] == '5'
    p.write_text('seed = 5\n', encoding='utf8')
    with pytest.raises(ConfigurationError):
        get_config(p)


def test_bundled_configs():
    assert bundled_configs() == ['mtlcc', 'pastis']
    pastis = RunConfig.from_file('pastis')
    assert pastis == RunConfig.bundled('pastis.cfg')
    assert pastis['model.in_channels'] == 10
    assert pastis['model.patches'] == ((1, 2, 2), (2, 2, 2), (2, 2, 2))
    assert pastis['train.class_weights'] is None
    assert pastis['train.include_background'] is True

    mtlcc = RunConfig.from_file('mtlcc')
    assert (mtlcc['model.num_classes'], mtlcc['data.height']) == (18, 24)
    assert mtlcc.train_config().exclude == (0,)

    with pytest.raises(FileNotFoundError):
        RunConfig.from_file('unknown')


def test_config_file(tmp_path):
    p = tmp_path / 'run.cfg'
    p.write_text('[train]\nseed = 5\nclass_weights = 1 2.5\n', encoding='utf8')
    cfg = RunConfig.from_file(p)
    assert cfg['train.seed'] == 5
    assert cfg['train.class_weights'] == (1.0, 2.5)
    assert cfg['model.attention'] == SCHEMA['model.attention'][1]

    p.write_text('[train]\nseeds = 5\n', encoding='utf8')
    with pytest.raises(ConfigurationError):
        RunConfig.from_file(p)
    p.write_text('[model]\npatches = 1,2 2,2,2\n', encoding='utf8')
    with pytest.raises(ConfigurationError):
        RunConfig.from_file(p)


@pytest.mark.parametrize('key,raw', [
    ('train.seed', 'x'),
    ('train.augment', 'maybe'),
    ('model.embed_dims', '8 a'),
])
def test_invalid_value(key, raw):
    with pytest.raises(ConfigurationError) as e:
        RunConfig().set(key, raw)
    assert key in str(e.value)


def test_write(tmp_path):
    cfg = RunConfig.from_file('mtlcc').set('train.class_weights', '0.5 2')
    res = RunConfig.from_file(cfg.write(tmp_path / 'out.cfg'))
    assert res == cfg


def test_set_variant():
    cfg = RunConfig().set_variant('na', na_kernel=7)
    assert cfg['model.num_heads'] == NA_HEADS
    assert cfg['model.na_kernel'] == 7
    m = cfg.model_config()
    assert m.attention == AttentionKind.na
    assert [s.num_heads for s in m.stages] == list(NA_HEADS)
    assert cfg.set_variant('mhsa')['model.num_heads'] == (2, 4, 8)


def test_model_and_train_config():
    cfg = RunConfig()
    assert cfg.model_config().validate()
    cfg['model.num_blocks'] = (2, 2)
    with pytest.raises(ConfigurationError):
        cfg.model_config()
    with pytest.raises(ConfigurationError):
        RunConfig({'train.epochs': -1}).train_config()
    with pytest.raises(ConfigurationError):
        RunConfig({'training.epochs': 1})
    tcfg = RunConfig({'train.epochs': 2}).train_config()
    assert (tcfg.epochs, tcfg.batch_size, tcfg.exclude) == (2, 32, ())


def test_eval_batch_size_follows_train_batch_size(tmp_path):
    assert RunConfig({'train.batch_size': 8})['eval.batch_size'] == 8

    p = tmp_path / 'run.cfg'
    p.write_text('[train]\nbatch_size = 6\n', encoding='utf8')
    cfg = RunConfig.from_file(p)
    assert cfg['eval.batch_size'] == 6
    res = RunConfig.from_file(cfg.write(tmp_path / 'out.cfg'))
    res['train.batch_size'] = 3
    assert res['eval.batch_size'] == 3

    cfg.set('eval.batch_size', '2')
    assert (cfg['eval.batch_size'], cfg['train.batch_size']) == (2, 6)
    assert RunConfig.from_file('pastis')['eval.batch_size'] == 32


def test_set_variant_keeps_custom_heads():
    cfg = RunConfig({'model.embed_dims': (8, 16, 32), 'model.num_heads': (2, 2, 4)})
    assert cfg.set_variant('na')['model.num_heads'] == (2, 2, 4)
    assert cfg.model_config().attention == AttentionKind.na
