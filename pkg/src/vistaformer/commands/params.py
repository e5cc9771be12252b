"""
Count the trainable parameters of a model configuration, per encoder stage, decoder
reducers and classification head.
"""
import csv

from clldutils.clilib import PathType

from vistaformer.cliutil import add_config, run_config, print_table
from vistaformer.models.vistaformer import build_model, count_parameters


def register(parser):
    add_config(parser, 'variant')
    parser.add_argument(
        '--out',
        type=PathType(must_exist=False, type='file'),
        default=None,
        help='Write the counts as CSV with columns part,parameters',
    )


def run(args):
    cfg = run_config(args).model_config()
    counts = count_parameters(build_model(cfg))
    print_table(['part', 'parameters'], list(counts.items()))
    print('total: {0:,} ({1:.2f}M), attention: {2}, T={3}'.format(
        counts['total'], counts['total'] / 1e6, cfg.attention.value, cfg.max_seq_len))
    if args.out:
        with args.out.open('w', encoding='utf8', newline='') as fp:
            writer = csv.writer(fp, lineterminator='\n')
            writer.writerow(['part', 'parameters'])
            writer.writerows(counts.items())
