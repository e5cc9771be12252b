"""
Evaluate a checkpoint on a split of a dataset directory.

Prints overall accuracy, mean IoU and per-class IoU and recall.
"""
import csv

from clldutils.clilib import PathType

from vistaformer.cliutil import add_config, run_config, print_table
from vistaformer.commands.train import open_dataset
from vistaformer.models.checkpoint import load_model
from vistaformer.train.loop import evaluate


def register(parser):
    add_config(parser, 'include_background')
    parser.add_argument('--checkpoint', type=PathType(type='file'), required=True)
    parser.add_argument('--data', type=PathType(type='dir'), default=None)
    parser.add_argument('--split', choices=['train', 'val', 'test'], default='val')
    parser.add_argument(
        '--out',
        type=PathType(must_exist=False, type='file'),
        default=None,
        help='Write per-class scores as CSV with columns class,iou,recall',
    )


def _fmt(v):
    return '{0:.4f}'.format(v)


def run(args):
    rc = run_config(args)
    tcfg = rc.train_config()
    dataset = open_dataset(args, rc)
    model = load_model(args.checkpoint)
    res = evaluate(
        model,
        dataset,
        args.split,
        batch_size=rc['eval.batch_size'],
        exclude=tcfg.exclude,
        log=args.log)
    m = res.metrics
    print_table(
        ['class', 'IoU', 'recall'],
        [(k, _fmt(iou), _fmt(recall)) for k, (iou, recall) in enumerate(zip(m.iou, m.recall))])
    print('{0}: oA {1} mIoU {2} ({3} pixels{4})'.format(
        args.split, _fmt(m.oA), _fmt(m.mIoU), res.confusion.total,
        '' if tcfg.include_background else ', background excluded'))
    if args.out:
        with args.out.open('w', encoding='utf8', newline='') as fp:
            writer = csv.writer(fp, lineterminator='\n')
            writer.writerow(['class', 'iou', 'recall'])
            for k, (iou, recall) in enumerate(zip(m.iou, m.recall)):
                writer.writerow([k, repr(float(iou)), repr(float(recall))])
