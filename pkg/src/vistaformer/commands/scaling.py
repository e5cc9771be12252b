"""
Sweep the input size for the mhsa and na variants of a configuration and write the
operation counts as CSV.

The spatial sweep varies H = W at a fixed sequence length, the temporal sweep varies T
at a fixed size. The log-log slopes of the counts against H*W (or T) are printed.
"""
import collections

from clldutils.clilib import PathType

from vistaformer.cliutil import add_config, run_config, parse_ints, print_table
from vistaformer.lib.complexity import scaling_report, write_scaling_csv, loglog_slope

DEFAULT_VALUES = {'spatial': '32,64,96,128', 'temporal': '15,30,45,60'}


def register(parser):
    add_config(parser, 'variant')
    parser.add_argument('--axis', choices=['spatial', 'temporal'], default='spatial')
    parser.add_argument(
        '--values',
        default=None,
        help='Comma-separated sweep values (defaults: spatial {0}, temporal {1})'.format(
            DEFAULT_VALUES['spatial'], DEFAULT_VALUES['temporal']),
    )
    parser.add_argument('--batch', type=int, default=4)
    parser.add_argument('--seq-len', type=int, default=30, help='T of the spatial sweep')
    parser.add_argument('--size', type=int, default=64, help='H = W of the temporal sweep')
    parser.add_argument(
        '--out',
        type=PathType(must_exist=False, type='file'),
        default=None,
        help='CSV output with columns variant,B,C,T,H,W,total_flops,attn_flops',
    )


def run(args):
    rc = run_config(args)
    values = parse_ints(args.values or DEFAULT_VALUES[args.axis], name='--values')
    cfgs = collections.OrderedDict(
        (variant, rc.set_variant(variant).model_config()) for variant in ['mhsa', 'na'])
    rows = scaling_report(
        cfgs, args.axis, values, batch=args.batch, seq_len=args.seq_len, size=args.size)
    print_table(rows[0]._fields, rows)

    slopes = []
    for variant in cfgs:
        sel = [r for r in rows if r.variant == variant]
        xs = [r.H * r.W if args.axis == 'spatial' else r.T for r in sel]
        slopes.append((
            variant,
            '{0:.3f}'.format(loglog_slope(xs, [r.attn_flops for r in sel])),
            '{0:.3f}'.format(loglog_slope(xs, [r.total_flops for r in sel]))))
    print_table(['variant', 'attention slope', 'total slope'], slopes)
    if args.out:
        write_scaling_csv(rows, args.out)
