"""
Run configuration files.

A run configuration is an INI file with the sections ``[model]``, ``[train]``, ``[data]``
and ``[eval]``. Every option is typed by `SCHEMA`; options missing from a file take the
schema default (an unset ``eval.batch_size`` follows ``train.batch_size``), unknown sections
or options are rejected. List values are whitespace separated, the items of triple lists
are comma separated, e.g. ``patches = 1,2,2 2,2,2``.
"""
import pathlib
import collections
import configparser

from vistaformer.errors import ConfigurationError
from vistaformer.models.config import (
    ModelConfig, StageConfig, AttentionKind, REFERENCE_STAGES, _enum, is_reference_geometry,
    variant_heads,
)
from vistaformer.train.loop import TrainConfig

__all__ = ['get_config', 'RunConfig', 'SCHEMA', 'bundled_configs']

CONFIGS = pathlib.Path(__file__).parent / 'configs'


def get_config(p):
    """Read a config file.

    :return: dict of ('section.option', value) pairs, values as raw strings.
    """
    cfg = collections.OrderedDict()
    parser = configparser.ConfigParser()
    try:
        with pathlib.Path(p).open(encoding='utf8') as fp:
            parser.read_file(fp)
    except configparser.Error as e:
        raise ConfigurationError('{0}: {1}'.format(p, e))

    for section in parser.sections():
        for option in parser.options(section):
            cfg['{0}.{1}'.format(section, option)] = parser.get(section, option)
    return cfg


class _Type(object):
    def __init__(self, name, parse, format):
        self.name, self.parse, self.format = name, parse, format


def _bool(s):
    try:
        return configparser.ConfigParser.BOOLEAN_STATES[s.strip().lower()]
    except KeyError:
        raise ValueError('not a boolean: {0!r}'.format(s))


def _triple(s):
    res = tuple(int(n) for n in s.split(','))
    if len(res) != 3:
        raise ValueError('expected three comma-separated integers, got {0!r}'.format(s))
    return res


INT = _Type('int', int, str)
FLOAT = _Type('float', float, repr)
BOOL = _Type('bool', _bool, lambda v: 'true' if v else 'false')
STR = _Type('str', str.strip, str)
INTS = _Type(
    'int-list', lambda s: tuple(int(n) for n in s.split()), lambda v: ' '.join(map(str, v)))
TRIPLES = _Type(
    'triple-list',
    lambda s: tuple(_triple(n) for n in s.split()),
    lambda v: ' '.join(','.join(map(str, t)) for t in v))
OPTIONAL_FLOATS = _Type(
    'float-list',
    lambda s: tuple(float(n) for n in s.split()) or None,
    lambda v: ' '.join(repr(float(x)) for x in v or ()))
OPTIONAL_INT = _Type(
    'int', lambda s: int(s) if s.strip() else None, lambda v: '' if v is None else str(v))

_model, _train = ModelConfig(10, 20, 60), TrainConfig()

SCHEMA = collections.OrderedDict([
    ('model.in_channels', (INT, _model.in_channels)),
    ('model.num_classes', (INT, _model.num_classes)),
    ('model.max_seq_len', (INT, _model.max_seq_len)),
    ('model.attention', (STR, _model.attention.value)),
    ('model.na_kernel', (INT, _model.na_kernel)),
    ('model.embed_dims', (INTS, tuple(s.embed_dim for s in REFERENCE_STAGES))),
    ('model.patches', (TRIPLES, tuple(s.patch for s in REFERENCE_STAGES))),
    ('model.num_blocks', (INTS, tuple(s.num_blocks for s in REFERENCE_STAGES))),
    ('model.num_heads', (INTS, tuple(s.num_heads for s in REFERENCE_STAGES))),
    ('model.mlp_mult', (INTS, tuple(s.mlp_mult for s in REFERENCE_STAGES))),
    ('model.decoder_channels', (INT, _model.decoder_channels)),
    ('model.dropout_rate', (FLOAT, _model.dropout_rate)),
    ('model.drop_path_rate', (FLOAT, _model.drop_path_rate)),
    ('model.gated_conv', (BOOL, _model.gated_conv)),
    ('model.temporal_schedule', (STR, _model.temporal_schedule.value)),
    ('model.decoder_reduce', (STR, _model.decoder_reduce.value)),
    ('train.epochs', (INT, _train.epochs)),
    ('train.batch_size', (INT, _train.batch_size)),
    ('train.seed', (INT, _train.seed)),
    ('train.lr_start', (FLOAT, _train.lr_start)),
    ('train.lr_max', (FLOAT, _train.lr_max)),
    ('train.lr_final', (FLOAT, _train.lr_final)),
    ('train.warm_fraction', (FLOAT, _train.warm_fraction)),
    ('train.weight_decay', (FLOAT, _train.weight_decay)),
    ('train.augment', (BOOL, _train.augment)),
    ('train.include_background', (BOOL, _train.include_background)),
    ('train.background_class', (INT, _train.background_class)),
    ('train.class_weights', (OPTIONAL_FLOATS, None)),
    ('data.directory', (STR, '')),
    ('data.height', (INT, 32)),
    ('data.width', (INT, 32)),
    ('eval.batch_size', (OPTIONAL_INT, None)),
    ('eval.mc_passes', (INT, 10)),
])
STAGE_KEYS = ['embed_dims', 'patches', 'num_blocks', 'num_heads', 'mlp_mult']
# Options which, when unset, take the value of another option.
FALLBACKS = {'eval.batch_size': 'train.batch_size'}


def bundled_configs():
    return sorted(p.stem for p in CONFIGS.glob('*.cfg'))


class RunConfig(object):

    """Typed values of a run configuration, keyed as 'section.option'."""

    def __init__(self, values=None, source=None):
        self.values = collections.OrderedDict((k, v[1]) for k, v in SCHEMA.items())
        self.source = source
        for key, value in (values or {}).items():
            self[key] = value

    def __repr__(self):
        return '<RunConfig {0}>'.format(self.source or '')

    def __getitem__(self, key):
        value = self.values[key]
        if value is None and key in FALLBACKS:
            return self[FALLBACKS[key]]
        return value

    def __setitem__(self, key, value):
        if key not in SCHEMA:
            raise ConfigurationError('{0}: unknown option {1}'.format(self.source or '', key))
        self.values[key] = value

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.values == other.values

    def __ne__(self, other):  # pragma: no cover
        return not self.__eq__(other)

    def set(self, key, raw):
        """Set option `key` from its string representation."""
        if key not in SCHEMA:
            raise ConfigurationError('{0}: unknown option {1}'.format(self.source or '', key))
        type_ = SCHEMA[key][0]
        try:
            self.values[key] = type_.parse(raw)
        except ValueError as e:
            raise ConfigurationError('{0}: invalid {1} value {2!r} for {3}: {4}'.format(
                self.source or '', type_.name, raw, key, e))
        return self

    @classmethod
    def from_file(cls, path):
        """Read a config file given by path, or the name of a bundled config."""
        p = pathlib.Path(path)
        if not p.exists():
            name = p.name if p.suffix == '.cfg' else p.name + '.cfg'
            if (CONFIGS / name).exists() and len(p.parts) == 1:
                p = CONFIGS / name
            else:
                raise FileNotFoundError('config {0} not found (bundled: {1})'.format(
                    path, ', '.join(bundled_configs())))
        res = cls(source=p)
        for key, raw in get_config(p).items():
            res.set(key, raw)
        return res

    @classmethod
    def bundled(cls, name):
        return cls.from_file(name)

    def write(self, path):
        parser = configparser.ConfigParser()
        for key, value in self.values.items():
            section, _, option = key.partition('.')
            if not parser.has_section(section):
                parser.add_section(section)
            parser.set(section, option, SCHEMA[key][0].format(value))
        with pathlib.Path(path).open('w', encoding='utf8') as fp:
            parser.write(fp)
        return path

    def set_variant(self, attention, na_kernel=None):
        """Select the attention variant together with its head counts."""
        attention = _enum(AttentionKind, attention)
        self['model.attention'] = attention.value
        if na_kernel:
            self['model.na_kernel'] = na_kernel
        if is_reference_geometry(self.stages()):
            self['model.num_heads'] = variant_heads(attention)
        return self

    def stages(self):
        lists = [self['model.' + k] for k in STAGE_KEYS]
        if len(set(len(v) for v in lists)) != 1:
            raise ConfigurationError('model: {0} must have the same length, got {1}'.format(
                ', '.join(STAGE_KEYS), ', '.join(str(len(v)) for v in lists)))
        return [
            StageConfig(dim, patch, num_blocks=blocks, num_heads=heads, mlp_mult=mult)
            for dim, patch, blocks, heads, mult in zip(*lists)]

    def model_config(self):
        stages = self.stages()
        kw = {
            key.partition('.')[2]: value for key, value in self.values.items()
            if key.startswith('model.') and key.partition('.')[2] not in STAGE_KEYS}
        return ModelConfig(stages=stages, **kw).validate()

    def train_config(self):
        return TrainConfig(**{
            key.partition('.')[2]: value for key, value in self.values.items()
            if key.startswith('train.')})
