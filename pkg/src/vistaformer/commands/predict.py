"""
Predict per-pixel classes with a checkpoint, optionally with Monte-Carlo dropout
uncertainty.

The CSV output has one row per pixel: sample_id,row,col,pred,prob,entropy, where prob is
the (mean) probability of the predicted class and entropy the predictive entropy.
"""
import csv

import numpy as np
from clldutils.clilib import PathType

from vistaformer.errors import ConfigurationError
from vistaformer.cliutil import add_config, run_config, print_table
from vistaformer.commands.train import open_dataset
from vistaformer.data.chip import IGNORE
from vistaformer.data.transforms import normalize
from vistaformer.lib import tensor as T
from vistaformer.models.checkpoint import load_model
from vistaformer.models.vistaformer import mc_dropout_predict

FIELDS = ['sample_id', 'row', 'col', 'pred', 'prob', 'entropy']


def register(parser):
    add_config(parser, 'seed', 'mc_dropout')
    parser.add_argument('--checkpoint', type=PathType(type='file'), required=True)
    parser.add_argument('--data', type=PathType(type='dir'), default=None)
    parser.add_argument('--split', choices=['train', 'val', 'test'], default='val')
    parser.add_argument(
        '--sample',
        action='append',
        default=[],
        help='Predict only this sample id; may be repeated',
    )
    parser.add_argument(
        '--out',
        type=PathType(must_exist=False, type='file'),
        required=True,
        help='CSV output with columns {0}'.format(','.join(FIELDS)),
    )


def predict(model, x, passes, seed):
    """
    Probabilities (B, K, H, W) and entropy (B, H, W) of one eval-mode pass, or the mean
    of `passes` passes with dropout active.
    """
    if passes is not None:
        return mc_dropout_predict(x, model, n_passes=passes, seed=seed)
    model.eval()
    with T.no_grad():
        probs = T.softmax(model(x), axis=1).data
    return probs, -np.sum(probs * np.log(np.maximum(probs, np.finfo(probs.dtype).tiny)), axis=1)


def run(args):
    rc = run_config(args)
    dataset = open_dataset(args, rc)
    ids = args.sample or dataset.split(args.split)
    if not ids:
        raise ConfigurationError('nothing to predict in split {0}'.format(args.split))
    model = load_model(args.checkpoint)
    passes = rc['eval.mc_passes'] if args.mc_dropout is not None else None
    batch_size = rc['eval.batch_size']

    summary = []
    with args.out.open('w', encoding='utf8', newline='') as fp:
        writer = csv.writer(fp, lineterminator='\n')
        writer.writerow(FIELDS)
        for start in range(0, len(ids), batch_size):
            chips = [
                normalize(dataset.load(i), dataset.manifest.stats)
                for i in ids[start:start + batch_size]]
            probs, entropy = predict(
                model,
                T.tensor(np.stack([c.input for c in chips])),
                passes,
                rc['train.seed'] + start)
            pred = probs.argmax(axis=1)
            prob = np.take_along_axis(probs, pred[:, None], axis=1)[:, 0]
            for b, chip in enumerate(chips):
                for (r, c), p in np.ndenumerate(pred[b]):
                    writer.writerow([
                        chip.sample_id, r, c, p,
                        '{0:.6f}'.format(prob[b, r, c]), '{0:.6f}'.format(entropy[b, r, c])])
                scored = chip.labels != IGNORE
                summary.append((
                    chip.sample_id,
                    '{0:.4f}'.format(float(np.mean(pred[b][scored] == chip.labels[scored]))),
                    '{0:.4f}'.format(float(entropy[b].mean()))))
    print_table(['sample', 'pixel agreement', 'mean entropy'], summary)
    mode = 'eval mode' if passes is None else '{0} dropout passes'.format(passes)
    args.log.info('wrote predictions for {0} samples ({1}) to {2}'.format(len(ids), mode, args.out))
