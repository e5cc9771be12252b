"""Shared functionality for vistaformer console scripts."""
import collections

from clldutils.markup import Table

from vistaformer.errors import ConfigurationError
from vistaformer.config import RunConfig

__all__ = ['kv', 'add_config', 'run_config', 'parse_shape', 'parse_ints', 'print_table']

SHORTHANDS = collections.OrderedDict([
    ('seed', 'train.seed'),
    ('include_background', 'train.include_background'),
    ('mc_dropout', 'eval.mc_passes'),
])


def kv(string):
    key, sep, value = string.partition('=')
    if not sep:
        raise ValueError(string)
    return key.strip(), value.strip()


def add_config(parser, *shorthands):
    """
    Add `--config` and the repeatable `--set section.option=value` to `parser`, plus the
    requested shorthands among 'seed', 'variant', 'include_background' and 'mc_dropout'.
    """
    parser.add_argument(
        '--config',
        metavar='CONFIG',
        help='Path of a run config file or name of a bundled config (pastis, '
             'mtlcc)',
        default='pastis',
    )
    parser.add_argument(
        '--set',
        metavar='SECTION.OPTION=VALUE',
        help='Override a config option; may be repeated',
        dest='overrides',
        action='append',
        type=kv,
        default=[],
    )
    if 'seed' in shorthands:
        parser.add_argument('--seed', type=int, default=None, help='Shorthand for train.seed')
    if 'variant' in shorthands:
        parser.add_argument(
            '--variant',
            choices=['mhsa', 'na'],
            default=None,
            help='Attention variant; selects the head counts of the variant as well',
        )
        parser.add_argument(
            '--na-k',
            type=int,
            default=None,
            help='Neighbourhood size of the na variant (shorthand for model.na_kernel)',
        )
    if 'include_background' in shorthands:
        group = parser.add_mutually_exclusive_group()
        group.add_argument(
            '--include-background',
            dest='include_background',
            action='store_const',
            const=True,
            default=None,
            help='Score the background class',
        )
        group.add_argument(
            '--exclude-background',
            dest='include_background',
            action='store_const',
            const=False,
            help='Do not score the background class',
        )
    if 'mc_dropout' in shorthands:
        parser.add_argument(
            '--mc-dropout',
            metavar='N',
            type=int,
            default=None,
            help='Number of Monte-Carlo dropout passes (shorthand for eval.mc_passes)',
        )


def run_config(args):
    """The `RunConfig` selected by `--config`, with overrides and shorthands applied."""
    cfg = RunConfig.from_file(args.config)
    for key, value in args.overrides:
        cfg.set(key, value)
    for name, key in SHORTHANDS.items():
        if getattr(args, name, None) is not None:
            cfg[key] = getattr(args, name)
    if getattr(args, 'variant', None):
        cfg.set_variant(args.variant, na_kernel=args.na_k)
    elif getattr(args, 'na_k', None):
        cfg['model.na_kernel'] = args.na_k
    return cfg


def parse_ints(s, n=None, name='value'):
    try:
        res = tuple(int(i) for i in s.replace(',', ' ').split())
    except ValueError:
        raise ConfigurationError('{0}: expected integers, got {1!r}'.format(name, s))
    if (n and len(res) != n) or not res or min(res) < 1:
        raise ConfigurationError('{0}: expected {1}positive integers, got {2!r}'.format(
            name, '{0} '.format(n) if n else '', s))
    return res


def parse_shape(s):
    """Parse 'B,C,T,H,W'."""
    return parse_ints(s, n=5, name='--shape')


def print_table(cols, rows, **kw):
    with Table(*cols, **kw) as t:
        t.extend(rows)
