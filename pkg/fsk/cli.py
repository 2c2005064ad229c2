"""
fsk Command Line Interface
==========================
Batch driver: build, check, spectrum, convergence, radial and the run ledger.

Exit codes: 0 pass, 1 check failure, 2 usage, 3 resource.
"""

import argparse
import sys
from typing import List, Optional

from .core import DUMPS, SUITES, FuzzySphereKit, RunConfig
from .errors import FskError
from .products import SAMPLE_FUNCTIONS


def _config(args, **overrides) -> RunConfig:
    values = dict(
        dim=args.dim,
        cutoff=args.cutoff,
        k=args.k,
        tol=args.tol,
        output=args.output,
        fmt=args.format,
        seed=args.seed,
    )
    values.update(overrides)
    return RunConfig(**values).validate()


def _lambda_range(text: str) -> List[int]:
    try:
        lo, hi = (int(part) for part in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}")
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"need 1 <= LO <= HI, got {text!r}")
    return list(range(lo, hi + 1))


def cmd_build(args):
    """Dump the operator matrices of the fuzzy algebra"""
    kit = FuzzySphereKit(args.project_dir)
    kit.build(_config(args, dump=tuple(args.dump or ())))
    return 0


def cmd_check(args):
    """Run a check suite; exit 1 on any residual above tolerance"""
    kit = FuzzySphereKit(args.project_dir)
    passed = kit.check(_config(args, suite=args.suite), inject_error=args.inject_error)
    return 0 if passed else 1


def cmd_spectrum(args):
    """Tabulate the spectrum of an observable"""
    kit = FuzzySphereKit(args.project_dir)
    kit.spectrum(_config(args), observable=args.observable)
    return 0


def cmd_convergence(args):
    """Tabulate strong-limit residuals over a range of cutoffs"""
    kit = FuzzySphereKit(args.project_dir)
    config = _config(args, cutoff=args.lambda_range[-1])
    kit.convergence(config, args.f, args.lambda_range, g_name=args.g)
    return 0


def cmd_radial(args):
    """Compare closed-form and finite-difference shell energies"""
    kit = FuzzySphereKit(args.project_dir)
    config = _config(args, cutoff=max(args.l))
    kit.radial(config, args.l, config.resolved_k, args.levels)
    return 0


def cmd_runs_list(args):
    kit = FuzzySphereKit(args.project_dir)
    kit.list_runs(limit=args.limit)
    return 0


def cmd_runs_verify(args):
    kit = FuzzySphereKit(args.project_dir)
    return 0 if kit.verify_run(args.run_hash) else 1


def cmd_runs_export(args):
    kit = FuzzySphereKit(args.project_dir)
    return 0 if kit.export_runs(args.output_dir or ".") else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuzzyspherekit",
        description="fuzzyspherekit - fuzzy sphere operator algebras and their checks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  fuzzyspherekit build --dim 3 --cutoff 2            # Dump the 9x9 operator matrices
  fuzzyspherekit build --dump frames --dump products # Add frame and coefficient tables
  fuzzyspherekit check --dim 3 --cutoff 2            # Relation suite
  fuzzyspherekit check --suite projectors --dim 4    # Projector suite
  fuzzyspherekit spectrum --dim 3 --cutoff 2 --format csv -o -
  fuzzyspherekit convergence --f t1 --lambda-range 2:6
  fuzzyspherekit radial --dim 3 --l 0 --k 10000 --levels 3
  fuzzyspherekit runs list                           # Recent runs
        """,
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--project-dir', '-d', default=None,
                        help='Project directory (default: current directory)')
    common.add_argument('--dim', type=int, default=3, help='Ambient dimension D (default 3)')
    common.add_argument('--cutoff', '--lambda', type=int, default=2, dest='cutoff',
                        help='Cutoff Lambda (default 2)')
    common.add_argument('--k', type=float, default=None,
                        help='Confining stiffness (default [Lambda(Lambda+D-2)]^2)')
    common.add_argument('--tol', type=float, default=1e-10, help='Residual tolerance (default 1e-10)')
    common.add_argument('--seed', type=int, default=0, help='Seed for sampled cross-checks')
    common.add_argument('--output', '-o', default=None,
                        help='Output file, or - for stdout (default: fsk_out/<command>-<hash>)')
    common.add_argument('--format', choices=('json', 'csv'), default='json', help='Output format')

    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    build_p = subparsers.add_parser('build', parents=[common], help='Dump the fuzzy algebra as JSON')
    build_p.add_argument('--dump', action='append', choices=DUMPS, default=None,
                         help='Also write per-level frames, product coefficients or projectors (repeatable)')
    build_p.set_defaults(func=cmd_build)

    check_p = subparsers.add_parser('check', parents=[common], help='Run a check suite')
    check_p.add_argument('--suite', choices=SUITES, default='relations', help='Suite to run')
    check_p.add_argument('--inject-error', action='store_true',
                         help='Perturb one xbar entry first (harness self-test, must fail)')
    check_p.set_defaults(func=cmd_check)

    spectrum_p = subparsers.add_parser('spectrum', parents=[common], help='Spectrum of an observable')
    spectrum_p.add_argument('--observable', choices=('x2',), default='x2')
    spectrum_p.set_defaults(func=cmd_spectrum)

    conv_p = subparsers.add_parser('convergence', parents=[common], help='Strong-limit residual table')
    conv_p.add_argument('--f', choices=SAMPLE_FUNCTIONS, default='t1', help='Function to truncate')
    conv_p.add_argument('--g', choices=SAMPLE_FUNCTIONS, default=None,
                        help='Second factor for the product residual')
    conv_p.add_argument('--lambda-range', type=_lambda_range, default=_lambda_range("2:6"),
                        help='Cutoff range LO:HI (default 2:6)')
    conv_p.set_defaults(func=cmd_convergence)

    radial_p = subparsers.add_parser('radial', parents=[common], help='Radial shell spectrum table')
    radial_p.add_argument('--l', type=int, nargs='+', default=[0], help='Angular levels')
    radial_p.add_argument('--levels', type=int, default=3, help='Radial levels per l')
    radial_p.set_defaults(func=cmd_radial, k=1e4)

    runs_p = subparsers.add_parser('runs', help='Inspect the run ledger')
    runs_sub = runs_p.add_subparsers(dest='runs_command')
    list_p = runs_sub.add_parser('list', parents=[common], help='List recent runs')
    list_p.add_argument('--limit', '-l', type=int, default=10, help='Maximum runs to show')
    list_p.set_defaults(func=cmd_runs_list)
    verify_p = runs_sub.add_parser('verify', parents=[common], help='Verify a run and its artifact')
    verify_p.add_argument('run_hash', help='Run hash to verify')
    verify_p.set_defaults(func=cmd_runs_verify)
    export_p = runs_sub.add_parser('export', parents=[common], help='Export the ledger with a checksum')
    export_p.add_argument('--output-dir', help='Directory for runs.json')
    export_p.set_defaults(func=cmd_runs_export)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if not getattr(args, 'func', None):
        parser.print_help()
        return 2

    try:
        return args.func(args)
    except KeyboardInterrupt:
        print("\n🚫 Operation cancelled", file=sys.stderr)
        return 1
    except FskError as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
