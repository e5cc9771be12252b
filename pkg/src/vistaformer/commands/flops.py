"""
Count the operations of a model on an input shape, per layer and category.

One multiply-accumulate counts as one FLOP; see the convention line of the report.
"""
import csv

from clldutils.clilib import PathType

from vistaformer.cliutil import add_config, run_config, parse_shape, print_table
from vistaformer.lib.complexity import CATEGORIES, model_flops

BATCH = 4


def register(parser):
    add_config(parser, 'variant', 'seed')
    parser.add_argument(
        '--shape',
        metavar='B,C,T,H,W',
        default=None,
        help='Input shape; defaults to batch {0}, the config channels and sequence length '
             'and the data height and width'.format(BATCH),
    )
    parser.add_argument(
        '--measure',
        action='store_true',
        default=False,
        help='Count on an instrumented forward pass instead of a shape trace (small shapes)',
    )
    parser.add_argument(
        '--out',
        type=PathType(must_exist=False, type='file'),
        default=None,
        help='Write per-layer counts as CSV',
    )


def run(args):
    rc = run_config(args)
    cfg = rc.model_config()
    if args.shape:
        shape = parse_shape(args.shape)
    else:
        shape = (BATCH, cfg.in_channels, cfg.max_seq_len, rc['data.height'], rc['data.width'])
    report = model_flops(cfg, shape, measure=args.measure, seed=rc['train.seed'])

    print_table(
        ['layer', 'measured', 'analytic'],
        [(e.name, e.measured, e.analytic or '') for e in report.entries if e.measured])
    print_table(['category', 'FLOPs'], list(report.totals.items()))
    print('total: {0:,} ({1:.2f} GFLOPs) for input {2}, attention: {3}'.format(
        report.total, report.total / 1e9, shape, cfg.attention.value))
    print('convention: {0}'.format(report.convention))

    if args.out:
        with args.out.open('w', encoding='utf8', newline='') as fp:
            writer = csv.writer(fp, lineterminator='\n')
            writer.writerow(['layer', 'analytic', 'measured', 'memory'] + list(CATEGORIES))
            for e in report.entries:
                writer.writerow(
                    [e.name, e.analytic, e.measured, e.memory] +
                    [e.categories[c] for c in CATEGORIES])
