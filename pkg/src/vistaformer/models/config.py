"""
Architecture descriptions.

A `ModelConfig` determines the parameter count of a model completely, and its FLOP count
together with an input shape.
"""
import collections

from clldutils.declenum import DeclEnum

from vistaformer.errors import ConfigurationError

__all__ = [
    'AttentionKind', 'TemporalSchedule', 'DecoderReduce', 'StageConfig', 'ModelConfig',
    'REFERENCE_STAGES', 'NA_HEADS', 'reference_config', 'micro_config',
    'is_reference_geometry', 'variant_heads']


class AttentionKind(DeclEnum):
    mhsa = 'mhsa', 'multi-head self-attention'
    na = 'na', 'neighbourhood attention'


class TemporalSchedule(DeclEnum):
    default = 'default', 'halve T in stages 2 and 3'
    first_stage_halves_t = 'first_stage_halves_t', 'halve T in stages 1 and 2'
    none = 'none', 'keep T in all stages'


class DecoderReduce(DeclEnum):
    conv1d = 'conv1d', 'temporal convolution spanning the stage sequence length'
    maxpool = 'maxpool', 'max over time'


TEMPORAL_STRIDES = {
    TemporalSchedule.default.value: (1, 2, 2),
    TemporalSchedule.first_stage_halves_t.value: (2, 2, 1),
    TemporalSchedule.none.value: (1, 1, 1),
}


class StageConfig(collections.namedtuple(
        'StageConfig', 'embed_dim patch stride num_blocks num_heads mlp_mult')):

    def __new__(cls, embed_dim, patch, stride=None, num_blocks=2, num_heads=2, mlp_mult=4):
        patch = tuple(patch)
        return super(StageConfig, cls).__new__(
            cls, embed_dim, patch, tuple(stride or patch), num_blocks, num_heads, mlp_mult)


REFERENCE_STAGES = (
    StageConfig(32, (1, 2, 2), num_heads=2),
    StageConfig(64, (2, 2, 2), num_heads=4),
    StageConfig(128, (2, 2, 2), num_heads=8),
)
NA_HEADS = (1, 2, 4)


def is_reference_geometry(stages):
    """Whether `stages` equal the reference stages up to their head counts."""
    return [s._replace(num_heads=None) for s in stages] == \
        [s._replace(num_heads=None) for s in REFERENCE_STAGES]


def variant_heads(attention):
    return NA_HEADS if _enum(AttentionKind, attention) == AttentionKind.na \
        else tuple(s.num_heads for s in REFERENCE_STAGES)


class ModelConfig(collections.namedtuple('ModelConfig', [
    'in_channels',
    'num_classes',
    'max_seq_len',
    'stages',
    'attention',
    'na_kernel',
    'decoder_channels',
    'dropout_rate',
    'drop_path_rate',
    'gated_conv',
    'temporal_schedule',
    'decoder_reduce',
])):

    def __new__(cls,
                in_channels,
                num_classes,
                max_seq_len,
                stages=REFERENCE_STAGES,
                attention=AttentionKind.mhsa,
                na_kernel=13,
                decoder_channels=64,
                dropout_rate=0.175,
                drop_path_rate=0.175,
                gated_conv=True,
                temporal_schedule=TemporalSchedule.default,
                decoder_reduce=DecoderReduce.conv1d):
        return super(ModelConfig, cls).__new__(
            cls,
            in_channels,
            num_classes,
            max_seq_len,
            tuple(s if isinstance(s, StageConfig) else StageConfig(**s) for s in stages),
            _enum(AttentionKind, attention),
            na_kernel,
            decoder_channels,
            dropout_rate,
            drop_path_rate,
            gated_conv,
            _enum(TemporalSchedule, temporal_schedule),
            _enum(DecoderReduce, decoder_reduce))

    def with_attention(self, attention, na_kernel=None, num_heads=None):
        """Switch the attention variant.

        :param num_heads: head counts per stage. By default the reference stages get the \
        head counts of the variant, other stage lists keep theirs.
        """
        attention = _enum(AttentionKind, attention)
        if num_heads is None and is_reference_geometry(self.stages):
            num_heads = variant_heads(attention)
        stages = self.stages
        if num_heads is not None:
            if len(num_heads) != len(stages):
                raise ConfigurationError('{0} head counts for {1} stages'.format(
                    len(num_heads), len(stages)))
            stages = tuple(s._replace(num_heads=h) for s, h in zip(stages, num_heads))
        return self._replace(
            attention=attention, stages=stages, na_kernel=na_kernel or self.na_kernel)

    def stage_geometry(self):
        """
        (patch, stride) per stage, with the temporal extent set by the schedule. Stage
        lists of other lengths than the schedule keep their own temporal geometry.
        """
        strides = TEMPORAL_STRIDES[self.temporal_schedule.value]
        if len(strides) != len(self.stages):
            return [(s.patch, s.stride) for s in self.stages]
        return [
            ((t,) + s.patch[1:], (t,) + s.stride[1:]) for s, t in zip(self.stages, strides)]

    def stage_seq_lens(self):
        """Temporal length of each stage output for inputs of length `max_seq_len`."""
        res, t = [], self.max_seq_len
        for i, (patch, stride) in enumerate(self.stage_geometry(), start=1):
            t = (t - patch[0]) // stride[0] + 1
            if t < 1:
                raise ConfigurationError(
                    'stage {0}: max_seq_len {1} too short for the temporal patches'.format(
                        i, self.max_seq_len))
            res.append(t)
        return res

    @property
    def spatial_factor(self):
        """Total spatial downsampling of the encoder; H and W are padded to multiples."""
        res = 1
        for patch, stride in self.stage_geometry():
            res *= stride[1]
        return res

    def validate(self):
        for field in ['in_channels', 'num_classes', 'max_seq_len', 'decoder_channels']:
            if getattr(self, field) < 1:
                raise ConfigurationError('{0} must be positive, got {1}'.format(
                    field, getattr(self, field)))
        if not self.stages:
            raise ConfigurationError('at least one encoder stage is needed')
        for field in ['dropout_rate', 'drop_path_rate']:
            if not 0 <= getattr(self, field) < 1:
                raise ConfigurationError('{0} must be in [0, 1), got {1}'.format(
                    field, getattr(self, field)))
        if self.attention == AttentionKind.na and \
                (self.na_kernel < 1 or self.na_kernel % 2 == 0):
            raise ConfigurationError(
                'na_kernel must be a positive odd number, got {0}'.format(self.na_kernel))
        for i, s in enumerate(self.stages, start=1):
            if s.embed_dim < 1 or s.num_blocks < 0 or s.mlp_mult < 1 or s.num_heads < 1 \
                    or s.embed_dim % s.num_heads:
                raise ConfigurationError('stage {0}: invalid geometry {1}'.format(i, s))
            if len(s.patch) != 3 or len(s.stride) != 3 or s.patch[1:] != s.stride[1:] \
                    or min(s.patch + s.stride) < 1:
                raise ConfigurationError(
                    'stage {0}: patch {1} and stride {2} must be non-overlapping'.format(
                        i, s.patch, s.stride))
        self.stage_seq_lens()
        return self

    def asdict(self):
        res = self._asdict()
        res['stages'] = [s._asdict() for s in self.stages]
        for key in ['attention', 'temporal_schedule', 'decoder_reduce']:
            res[key] = res[key].value
        return res

    @classmethod
    def fromdict(cls, d):
        d = dict(d)
        d['stages'] = [StageConfig(**s) for s in d['stages']]
        return cls(**d)


def _enum(cls, value):
    if isinstance(value, str):
        try:
            return cls.from_string(value)
        except ValueError:
            raise ConfigurationError('invalid {0}: {1!r}, expected one of {2}'.format(
                cls.__name__, value, ', '.join(e.value for e in cls)))
    return value


def reference_config(dataset='pastis', attention='mhsa'):
    """The reference architecture with the input settings of a benchmark dataset."""
    if dataset == 'pastis':
        cfg = ModelConfig(in_channels=10, num_classes=20, max_seq_len=60)
    elif dataset == 'mtlcc':
        cfg = ModelConfig(in_channels=13, num_classes=18, max_seq_len=46)
    else:
        raise ConfigurationError('unknown dataset {0!r}'.format(dataset))
    return cfg.with_attention(attention)


def micro_config(**kw):
    """A small model for gradient checks and toy training."""
    kw.setdefault('in_channels', 4)
    kw.setdefault('num_classes', 3)
    kw.setdefault('max_seq_len', 4)
    kw.setdefault('stages', (
        StageConfig(8, (1, 2, 2), num_blocks=1, num_heads=2),
        StageConfig(16, (2, 2, 2), num_blocks=1, num_heads=2),
        StageConfig(32, (2, 2, 2), num_blocks=1, num_heads=4),
    ))
    kw.setdefault('decoder_channels', 8)
    kw.setdefault('dropout_rate', 0.0)
    kw.setdefault('drop_path_rate', 0.0)
    return ModelConfig(**kw)
