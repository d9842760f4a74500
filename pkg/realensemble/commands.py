"""
``realensemble`` command line entry point.

    realensemble run CONFIG [--out DIR] [--model a|b] [--seed N]
    realensemble scan CONFIG [--out DIR] [--jobs N]
    realensemble reproduce PRESET [--out DIR] [--jobs N]
    realensemble validate CONFIG

Exit status: 0 on success, 1 for configuration errors, 2 for integration
failures and 3 when a scan finished with failed cells.
"""
from __future__ import (absolute_import, division, print_function,
                        unicode_literals)

import argparse
import logging
import os.path as op
import sys

from . import conf
from .core import ConfigurationError, IntegrationError
from .experiments import (PRESETS, ExperimentConfig, ScanGrid,
                          document_kind, load_document, reproduce,
                          run_experiment, scan_phase_space, validate_config)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INTEGRATION = 2
EXIT_PARTIAL = 3


def _parser():
    parser = argparse.ArgumentParser(
        prog='realensemble',
        description='Evolve real-ensemble models of a finite-level quantum '
                    'system and classify their relaxation to equilibrium.')
    parser.add_argument('-v', '--verbose', action='store_true',
                        help='debug logging')
    parser.add_argument('-q', '--quiet', action='store_true',
                        help='only log warnings and errors')
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    def common(p, jobs=False):
        p.add_argument('--out', default=None, metavar='DIR',
                       help='output directory (default: the run defaults '
                            '"output" field)')
        p.add_argument('--model', choices=('a', 'b'), default=None,
                       help='override the evolution law')
        p.add_argument('--seed', type=int, default=None,
                       help='override the Monte Carlo seed')
        p.add_argument('--t-end', type=float, default=None, dest='t_end',
                       help='override the integration horizon')
        if jobs:
            p.add_argument('--jobs', type=int, default=None, metavar='N',
                           help='worker processes')

    run = sub.add_parser('run', help='evolve one configured experiment')
    run.add_argument('config', help='YAML or JSON experiment document')
    common(run)

    scan = sub.add_parser('scan', help='classify every (c, dphi0) cell')
    scan.add_argument('config', help='YAML or JSON scan document')
    common(scan, jobs=True)

    rep = sub.add_parser('reproduce', help='run a named preset')
    rep.add_argument('preset', choices=sorted(PRESETS))
    common(rep, jobs=True)

    val = sub.add_parser('validate', help='check a config document')
    val.add_argument('config')
    return parser


def _configure_logging(args):
    if args.quiet:
        level = logging.WARNING
    elif args.verbose:
        level = logging.DEBUG
    else:
        level = logging.INFO
    logging.basicConfig(level=level,
                        format='%(asctime)s %(name)s %(levelname)s: '
                               '%(message)s')


def _overrides(args):
    out = {}
    if args.model is not None:
        out['model'] = args.model
    if args.seed is not None:
        out['seed'] = args.seed
    if args.t_end is not None:
        out['integrator'] = {'t_end': args.t_end}
        out['diagnostics'] = {'horizon': args.t_end}
    return out


def _merge(doc, overrides):
    doc = dict(doc)
    for key, value in overrides.items():
        if isinstance(value, dict):
            doc[key] = dict(doc.get(key, {}), **value)
        else:
            doc[key] = value
    return doc


def _out_dir(args, doc=None):
    if args.out is not None:
        return args.out
    if doc is not None and doc.get('output', {}).get('directory'):
        return doc['output']['directory']
    return conf.run_defaults['output']


def _cmd_run(args):
    doc = _merge(load_document(args.config), _overrides(args))
    cfg = ExperimentConfig(doc)
    result = run_experiment(cfg, _out_dir(args, doc))
    print("{}: {} (decay: {})".format(cfg.name,
                                      result.report['classification'],
                                      result.report['decay_class']))
    return EXIT_OK


def _cmd_scan(args):
    doc = load_document(args.config)
    overrides = _overrides(args)
    if overrides:
        doc = dict(doc, template=_merge(doc.get('template', {}), overrides))
    grid = ScanGrid.from_dict(doc)
    out_dir = _out_dir(args)
    result = scan_phase_space(grid, op.join(out_dir, 'scan.csv'), args.jobs)
    print("{} cells, {} failed".format(len(result.rows), result.failures))
    return EXIT_PARTIAL if result.failures else EXIT_OK


def _cmd_reproduce(args):
    integrator = None
    if args.t_end is not None:
        integrator = {'t_end': args.t_end}
    result = reproduce(args.preset, _out_dir(args), jobs=args.jobs,
                       model=args.model, seed=args.seed,
                       integrator=integrator)
    if result.scan is not None:
        print("{} cells, {} failed".format(len(result.scan.rows),
                                           result.scan.failures))
        return EXIT_PARTIAL if result.scan.failures else EXIT_OK
    for name in sorted(result.runs):
        print("{}: {}".format(name,
                              result.runs[name].report['classification']))
    return EXIT_OK


def _cmd_validate(args):
    doc = load_document(args.config)
    violations = validate_config(doc, document_kind(doc))
    for v in violations:
        print(v)
    if violations:
        return EXIT_CONFIG
    print("{}: ok".format(args.config))
    return EXIT_OK


_COMMANDS = {'run': _cmd_run,
             'scan': _cmd_scan,
             'reproduce': _cmd_reproduce,
             'validate': _cmd_validate}


def main(argv=None):
    args = _parser().parse_args(argv)
    _configure_logging(args)
    try:
        return _COMMANDS[args.command](args)
    except ConfigurationError as err:
        logger.error("%s", err)
        return EXIT_CONFIG
    except (IOError, OSError) as err:
        logger.error("%s", err)
        return EXIT_CONFIG
    except IntegrationError as err:
        logger.error("integration failed: %s", err)
        return EXIT_INTEGRATION


if __name__ == '__main__':
    sys.exit(main())
