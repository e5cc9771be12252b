"""
Train a model on a dataset directory written by gen_data.

Writes history.csv and the checkpoint model.vfck to the output directory. The channels,
classes and sequence length of the model are taken from the dataset manifest.
"""
from clldutils.clilib import PathType

from vistaformer.errors import ConfigurationError
from vistaformer.cliutil import add_config, run_config, print_table
from vistaformer.data.dataset import SitsDataset
from vistaformer.models.vistaformer import build_model
from vistaformer.train.loop import run_trials


def register(parser):
    add_config(parser, 'seed', 'variant', 'include_background')
    parser.add_argument(
        '--data',
        type=PathType(type='dir'),
        default=None,
        help='Dataset directory (defaults to data.directory of the config)',
    )
    parser.add_argument('--out', type=PathType(must_exist=False, type='dir'), required=True)
    parser.add_argument('--epochs', type=int, default=None, help='Shorthand for train.epochs')
    parser.add_argument(
        '--trials',
        type=int,
        default=1,
        help='Number of runs with seeds seed, seed+1, ...; mean and std are reported',
    )


def open_dataset(args, rc):
    directory = args.data or rc['data.directory']
    if not directory:
        raise ConfigurationError('no dataset: pass --data or set data.directory')
    return SitsDataset(directory)


def dataset_config(rc, dataset):
    """The model config of `rc`, adapted to the inputs and classes of `dataset`."""
    m = dataset.manifest
    rc['model.in_channels'] = m.channels
    rc['model.num_classes'] = m.num_classes
    rc['model.max_seq_len'] = m.timesteps
    rc['data.directory'] = str(dataset.directory)
    rc['data.height'], rc['data.width'] = m.height, m.width
    return rc.model_config()


def run(args):
    rc = run_config(args)
    if args.epochs is not None:
        rc['train.epochs'] = args.epochs
    dataset = open_dataset(args, rc)
    cfg = dataset_config(rc, dataset)
    tcfg = rc.train_config()
    args.log.info('training {0} model with {1} parameters'.format(
        cfg.attention.value, build_model(cfg).num_parameters()))
    finals, summary = run_trials(
        lambda seed: build_model(cfg, seed=seed),
        dataset,
        tcfg,
        trials=args.trials,
        out=args.out,
        log=args.log)
    rc.write(args.out / 'run.cfg')
    if finals:
        print_table(list(finals[0]._fields), finals)
    if args.trials > 1:
        print_table(
            ['metric', 'mean', 'std'],
            [(k, '{0:.4f}'.format(m), '{0:.4f}'.format(s)) for k, (m, s) in summary.items()])
