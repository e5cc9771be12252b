"""
Check the gradients of every layer against central finite differences (64-bit).

Exits with code 1 if any check fails.
"""
from vistaformer.checks import gradient_suite
from vistaformer.cliutil import print_table
from vistaformer.lib.gradcheck import DEFAULT_TOL


def register(parser):
    parser.add_argument(
        '--micro',
        action='store_true',
        default=False,
        help='Also check the micro model end to end',
    )
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--tol', type=float, default=DEFAULT_TOL, help='Tolerance for layers')


def run(args):
    results = gradient_suite(micro=args.micro, seed=args.seed, tol=args.tol)
    print_table(
        ['check', 'result', 'max rel. error', 'tolerance', 'coordinates'],
        [(name, 'PASS' if r.passed else 'FAIL', '{0:.2e}'.format(r.max_rel_error),
          '{0:.0e}'.format(r.tol), r.n_checked) for name, r in results])
    failed = [name for name, r in results if not r.passed]
    if failed:
        args.log.error('gradient checks failed: {0}'.format(', '.join(failed)))
        return 1
