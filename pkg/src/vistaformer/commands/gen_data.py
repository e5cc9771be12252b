"""
Generate a synthetic dataset directory: manifest.ini plus one chip file per sample.

The defaults produce the toy dataset used to check learnability: 250 chips of 4 bands,
12 time steps and 32 x 32 pixels with 5 classes, 50 of them in the val split.
"""
from clldutils.clilib import PathType

from vistaformer.data.synthetic import SyntheticSpec, generate_synthetic_dataset


def register(parser):
    defaults = SyntheticSpec()
    parser.add_argument(
        '--out',
        type=PathType(must_exist=False, type='dir'),
        required=True,
        help='Output directory',
    )
    parser.add_argument('--seed', type=int, default=defaults.seed)
    for name in ['n_samples', 'num_classes', 'channels', 'timesteps', 'height', 'width']:
        parser.add_argument(
            '--' + name.replace('_', '-'), dest=name, type=int, default=getattr(defaults, name))
    for name in [
        'cloud_prob', 'background_fraction', 'skew', 'void_prob', 'val_fraction',
        'test_fraction',
    ]:
        parser.add_argument(
            '--' + name.replace('_', '-'),
            dest=name,
            type=float,
            default=getattr(defaults, name))


def run(args):
    spec = SyntheticSpec(**{f: getattr(args, f) for f in SyntheticSpec._fields})
    manifest = generate_synthetic_dataset(spec, args.out, log=args.log)
    print('{0}: {1} train, {2} val, {3} test chips of shape {4}'.format(
        args.out,
        *[len(manifest.splits[s]) for s in ['train', 'val', 'test']],
        (manifest.channels, manifest.timesteps, manifest.height, manifest.width)))
