"""
Config-driven experiments: single runs, convergence scans over the
(c, dphi0) plane and the named reproduction presets.
"""
from __future__ import (absolute_import, division, print_function,
                        unicode_literals)

import copy
import hashlib
import itertools
import json
import logging
import os.path as op
import time
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import yaml
from jsonschema import Draft4Validator
from pkg_resources import resource_filename

from . import conf
from .core import ConfigurationError, IntegrationError, RealEnsembleError
from .diagnostics import (analyze, mean_phase_series, qm_value_probabilities)
from .ensemble import EnsembleState, EvolutionLaw
from .hamiltonian import CouplingMatrix, PauliCoefficients, pauli_to_coupling
from .integrate import IntegratorControls, evolve
from .kernels import (CurvatureError, kernel_curvature, kernel_for_sharpness,
                      parse_kernel, validate_kernel)
from .montecarlo import run_population, sample_initial_ensemble
from .perturbation import oracle_report
from .utils import _make_sure_path_exists, spawn_rngs
from . import writers

logger = logging.getLogger(__name__)

_SCHEMAS = {}


def _schema(name):
    if name not in _SCHEMAS:
        fname = resource_filename('realensemble', 'json/{}.json'.format(name))
        with open(fname, 'r') as fin:
            _SCHEMAS[name] = json.load(fin)
    return _SCHEMAS[name]


class ConfigValidationError(ConfigurationError):
    "Carries every violation found in a config document"
    def __init__(self, violations):
        self.violations = list(violations)
        super(ConfigValidationError, self).__init__(
            "invalid configuration:\n  " + "\n  ".join(self.violations))


def load_document(path):
    """Read a YAML (or JSON) config document"""
    with open(path) as fin:
        try:
            doc = yaml.safe_load(fin)
        except yaml.YAMLError as err:
            raise ConfigValidationError(["{}: {}".format(path, err)])
    if not isinstance(doc, dict):
        raise ConfigValidationError(["{} does not contain a mapping".format(
            path)])
    return doc


def _schema_violations(doc, name):
    validator = Draft4Validator(_schema(name))
    out = []
    for err in sorted(validator.iter_errors(doc), key=lambda e: list(e.path)):
        where = '/'.join(str(p) for p in err.path) or '<root>'
        out.append("{}: {}".format(where, err.message))
    return out


def _coupling_from_doc(ham):
    if 'R' in ham:
        return CouplingMatrix(ham['R'], ham['beta'])
    return pauli_to_coupling(PauliCoefficients(ham.get('ct', 0.0),
                                               ham.get('cx', 0.0),
                                               ham.get('cy', 0.0),
                                               ham.get('cz', 0.0)))


def _initial_from_doc(init, dim):
    unit = np.pi if init.get('phase_unit', 'rad') == 'pi' else 1.0
    if 'entries' in init:
        if 'rho' in init or 'phi' in init:
            raise ConfigurationError("give initial entries or nested rho/phi "
                                     "lists, not both")
        return EnsembleState.from_entries(
            ((e['a'], e['phi'] * unit, e['rho']) for e in init['entries']),
            dim=dim)
    if 'rho' not in init or 'phi' not in init:
        raise ConfigurationError("initial state needs entries or both rho "
                                 "and phi")
    phi = [[p * unit for p in group] for group in init['phi']]
    s = EnsembleState.from_groups(init['rho'], phi)
    if s.dim != dim:
        raise ConfigurationError("initial state lists {} observable values "
                                 "but the Hamiltonian has {}".format(s.dim,
                                                                     dim))
    return s


class ExperimentConfig(object):
    """A validated experiment document

    Build with ``ExperimentConfig.from_dict`` (or ``from_file``); every
    violation is collected before raising ConfigValidationError.

    Parameters
    ----------
    doc : dict
        The experiment document

    defaults : dict, optional
        Run defaults, normally ``conf.run_defaults``
    """
    def __init__(self, doc, defaults=None):
        if defaults is None:
            defaults = conf.run_defaults
        violations = _schema_violations(doc, 'experiment')
        if violations:
            raise ConfigValidationError(violations)
        self.doc = copy.deepcopy(doc)
        self.name = doc.get('name', 'experiment')
        self.model = str(doc.get('model', 'a')).lower()

        integ = doc.get('integrator', {})
        diag = doc.get('diagnostics', {})
        self.floor = float(integ.get('floor', defaults['floor']))
        self.horizon = float(diag.get('horizon', defaults['horizon']))
        self.sigma_floor = float(diag.get('sigma_floor', 1e-8))
        self.seed = doc.get('seed')
        out = doc.get('output', {})
        self.output_dir = out.get('directory')
        self.hdf5 = bool(out.get('hdf5', False))
        self.montecarlo = doc.get('montecarlo')

        self.coupling = self.kernel = self.initial = self.controls = None
        try:
            self.coupling = _coupling_from_doc(doc['hamiltonian'])
        except ConfigurationError as err:
            violations.append("hamiltonian: {}".format(err))
        try:
            self.kernel = parse_kernel(doc['kernel'])
            found = validate_kernel(self.kernel)
            violations.extend("kernel: {} at dphi={!r}: {}".format(*v)
                              for v in found)
        except ConfigurationError as err:
            violations.append("kernel: {}".format(err))
        if self.coupling is not None:
            try:
                self.initial = _initial_from_doc(doc['initial'],
                                                 self.coupling.dim)
            except ConfigurationError as err:
                violations.append("initial: {}".format(err))
        try:
            self.controls = IntegratorControls(
                dt=integ.get('dt', defaults['dt']),
                t_end=integ.get('t_end', defaults['t_end']),
                snapshot_stride=integ.get('snapshot_stride',
                                          defaults['snapshot_stride']),
                tolerance=integ.get('tolerance', defaults['tolerance']),
                mode=integ.get('mode', defaults['mode']))
        except ConfigurationError as err:
            violations.append("integrator: {}".format(err))
        if violations:
            raise ConfigValidationError(violations)

    @classmethod
    def from_dict(cls, doc, defaults=None):
        return cls(doc, defaults)

    @classmethod
    def from_file(cls, path, defaults=None):
        return cls(load_document(path), defaults)

    def law(self):
        return EvolutionLaw(self.coupling, self.kernel, self.model,
                            floor=self.floor)

    def semantic_dict(self):
        "Every field that changes the numbers a run produces"
        doc = {'coupling': self.coupling.to_dict(),
               'kernel': self.kernel.spec,
               'model': self.model,
               'initial': self.initial.to_dict(),
               'integrator': dict(self.controls._asdict(), floor=self.floor),
               'diagnostics': {'horizon': self.horizon,
                               'sigma_floor': self.sigma_floor}}
        if self.montecarlo is not None:
            doc['montecarlo'] = self.montecarlo
            doc['seed'] = self.seed
        return doc

    def config_hash(self):
        text = json.dumps(self.semantic_dict(), sort_keys=True,
                          separators=(',', ':'))
        return hashlib.sha256(text.encode('utf-8')).hexdigest()

    def to_dict(self):
        "Config echo with the resolved defaults filled in"
        doc = copy.deepcopy(self.doc)
        doc['model'] = self.model
        doc['integrator'] = dict(self.controls._asdict(), floor=self.floor)
        doc['diagnostics'] = {'horizon': self.horizon,
                              'sigma_floor': self.sigma_floor}
        return doc

    def __repr__(self):
        return '{0.__class__.__name__}(name={0.name!r}, kernel={0.kernel!r}, '\
            'model={0.model!r})'.format(self)


def validate_config(doc, kind='experiment'):
    """List every problem with a config document, empty when valid"""
    if kind == 'scan':
        try:
            ScanGrid.from_dict(doc)
        except ConfigValidationError as err:
            return err.violations
        return []
    try:
        ExperimentConfig(doc)
    except ConfigValidationError as err:
        return err.violations
    return []


def document_kind(doc):
    "'scan' for scan documents, 'experiment' otherwise"
    return 'scan' if 'scan' in doc or 'template' in doc else 'experiment'


RunResult = namedtuple('RunResult', ['config', 'trajectory', 'report',
                                     'oracle', 'manifest', 'population'])


def _version():
    from . import __version__
    return __version__


def _curvature_lambda(kernel):
    try:
        return kernel_curvature(kernel)[1]
    except CurvatureError:
        logger.info("no curvature for %r, skipping the sigma fit", kernel)
        return None


def _oracle(report, horizon, lam):
    "Analytic predictions, with sigma fit from the dispersion at the horizon"
    if lam is None:
        return {'lambda': None, 'sigma_fit': None, 'alpha_plus': None,
                'alpha_minus': None, 'predicted_variance': None,
                'predicted_decay_class': None}
    tilde_variance = None
    if lam > 0:
        idx = min(np.searchsorted(report.times, horizon * (1 - 1e-9)),
                  len(report.times) - 1)
        sigma = report.per_value_sigma[idx]
        sigma = sigma[np.isfinite(sigma)]
        if len(sigma):
            tilde_variance = float(np.mean(
                (lam * report.times[idx] * sigma) ** 2))
    return oracle_report(lam, tilde_variance)


def _run_population(cfg, law):
    mc = cfg.montecarlo
    rng = spawn_rngs(cfg.seed, 1)[0]
    p0 = sample_initial_ensemble(cfg.initial, mc['n'], rng)
    return run_population(p0, law, mc.get('dt', cfg.controls.dt),
                          mc.get('t_end', cfg.controls.t_end), rng,
                          snapshot_stride=mc.get('snapshot_stride',
                                                 cfg.controls.snapshot_stride),
                          record_copies=mc.get('record_copies', False))


def run_experiment(cfg, out_dir=None, preset=None):
    """Evolve, analyze and (optionally) write the artifacts of one run

    Parameters
    ----------
    cfg : ExperimentConfig

    out_dir : str, optional
        Where to write trajectory.csv, value_probabilities.csv,
        phase_differences.csv, final_state.json, report.json,
        oracle.json, manifest.json (and trajectory.h5, events.csv,
        population.csv when configured).  Nothing is written when omitted.

    preset : str, optional
        Preset name stamped on the manifest

    Returns
    -------
    RunResult
    """
    start = time.time()
    manifest = {'name': cfg.name,
                'config_hash': cfg.config_hash(),
                'version': _version(),
                'preset': preset,
                'config': cfg.to_dict()}
    if out_dir is not None:
        _make_sure_path_exists(out_dir)
    law = cfg.law()
    logger.info("running %s (%s)", cfg.name, manifest['config_hash'][:12])
    try:
        traj = evolve(cfg.initial, law, cfg.controls)
    except IntegrationError as err:
        manifest.update(status='failed', error=str(err),
                        error_type=type(err).__name__,
                        wall_time=time.time() - start)
        if out_dir is not None:
            writers.write_json(op.join(out_dir, 'manifest.json'), manifest)
        raise

    horizon = cfg.horizon
    if traj.times[-1] < horizon:
        logger.info("run ends at t = %r before the horizon %r; classifying "
                    "at the end of the run", traj.times[-1], horizon)
        horizon = float(traj.times[-1])
    lam = _curvature_lambda(cfg.kernel)
    report = analyze(traj, cfg.coupling, horizon=horizon, lam=lam,
                     sigma_floor=cfg.sigma_floor)

    population = None
    if cfg.montecarlo is not None:
        population = _run_population(cfg, law)

    report_doc = report.to_dict()
    report_doc.update({'horizon': horizon, 'lambda': lam,
                       'kernel': cfg.kernel.spec, 'model': cfg.model})
    oracle = _oracle(report, horizon, lam)
    manifest.update(status='ok', trust_flag=traj.trust_flag,
                    integration=traj.stats.to_dict(),
                    renormalizations=traj.stats.renormalizations,
                    wall_time=time.time() - start)
    if population is not None:
        manifest['montecarlo'] = {
            'n': int(population.snapshots[0].n),
            'extinctions': len(population.extinctions())}

    if out_dir is not None:
        _write_run(out_dir, cfg, traj, report, report_doc, oracle,
                   manifest, population)
    return RunResult(cfg, traj, report_doc, oracle, manifest, population)


def _write_run(out_dir, cfg, traj, report, report_doc, oracle, manifest,
               population):
    writers.write_trajectory_csv(op.join(out_dir, 'trajectory.csv'), traj,
                                 report.per_value_sigma,
                                 report.exponent_series)
    writers.write_value_probabilities(
        op.join(out_dir, 'value_probabilities.csv'), traj,
        qm_value_probabilities(traj, cfg.coupling))
    writers.write_phase_differences(op.join(out_dir, 'phase_differences.csv'),
                                    traj, mean_phase_series(traj))
    writers.write_json(op.join(out_dir, 'final_state.json'),
                       traj.final_state.to_dict())
    writers.write_json(op.join(out_dir, 'report.json'), report_doc)
    writers.write_json(op.join(out_dir, 'oracle.json'), oracle)
    if cfg.hdf5:
        writers.write_hdf5(op.join(out_dir, 'trajectory.h5'), traj,
                           attrs={'config_hash': manifest['config_hash'],
                                  'version': manifest['version'],
                                  'trust_flag': manifest['trust_flag']})
    if population is not None:
        writers.write_events(op.join(out_dir, 'events.csv'),
                             population.events)
        writers.write_population(op.join(out_dir, 'population.csv'),
                                 population)
    writers.write_json(op.join(out_dir, 'manifest.json'), manifest)


class ScanGrid(object):
    """The (c, dphi0) grid of a convergence scan

    Parameters
    ----------
    c : list of float
        Kernel sharpness; 0 selects the flat kernel

    dphi0 : list of float
        Initial phase separations in radians

    template : dict
        Experiment document used for every cell

    offset, scale : nested lists
        Initial phases are ``offset + scale * dphi0`` per value and entry
    """
    def __init__(self, c, dphi0, template, offset, scale, name='scan'):
        self.c = [float(v) for v in c]
        self.dphi0 = [float(v) for v in dphi0]
        self.template = copy.deepcopy(template)
        self.offset = [[float(v) for v in g] for g in offset]
        self.scale = [[float(v) for v in g] for g in scale]
        self.name = name
        problems = []
        if not self.c or not self.dphi0:
            problems.append("scan axes must not be empty")
        if ([len(g) for g in self.offset] != [len(g) for g in self.scale]):
            problems.append("phi_template offset and scale must have the "
                            "same shape")
        if problems:
            raise ConfigValidationError(problems)
        violations = validate_config(self.cell_document(self.c[0],
                                                        self.dphi0[0]))
        if violations:
            raise ConfigValidationError(["template: " + v
                                         for v in violations])

    @classmethod
    def from_dict(cls, doc):
        violations = _schema_violations(doc, 'scan')
        if violations:
            raise ConfigValidationError(violations)
        scan = doc['scan']
        phi = scan['phi_template']
        unit = np.pi if phi.get('phase_unit', 'rad') == 'pi' else 1.0
        offset = [[v * unit for v in g] for g in phi['offset']]
        return cls(scan['c'], scan['dphi0'], doc['template'], offset,
                   phi['scale'], name=doc.get('name', 'scan'))

    def cell_document(self, c, dphi0):
        doc = copy.deepcopy(self.template)
        doc['kernel'] = kernel_for_sharpness(c).spec
        init = dict(doc.get('initial', {}))
        init['phi'] = [[o + s * dphi0 for o, s in zip(og, sg)]
                       for og, sg in zip(self.offset, self.scale)]
        init.pop('phase_unit', None)
        doc['initial'] = init
        doc['name'] = '{}[c={!r},dphi0={!r}]'.format(self.name, c, dphi0)
        return doc

    def cells(self):
        "(c, dphi0) in row-major grid order"
        return list(itertools.product(self.c, self.dphi0))

    def __len__(self):
        return len(self.c) * len(self.dphi0)


ScanResult = namedtuple('ScanResult', ['rows', 'failures'])


def _run_cell(args):
    doc, c, dphi0 = args
    row = {'c': c, 'dphi0': dphi0}
    try:
        result = run_experiment(ExperimentConfig(doc))
        report = result.report
        per_value = ';'.join('{}:{}'.format(k, v['classification'])
                             for k, v in sorted(report['per_value'].items()))
        row.update(classification=report['classification'],
                   n_at_horizon=report['n_at_horizon'],
                   per_value=per_value)
    except Exception as err:
        logger.exception("scan cell c=%r dphi0=%r failed", c, dphi0)
        row.update(classification='error',
                   error='{}: {}'.format(type(err).__name__, err))
    return row


def scan_phase_space(grid, out_path=None, jobs=None):
    """Classify every cell of ``grid``

    Cells run in a process pool of ``jobs`` workers; rows are written to
    ``out_path`` in grid order as they complete.

    Returns
    -------
    ScanResult
        rows (dicts keyed on the scan CSV columns) and the number of
        failed cells
    """
    if jobs is None:
        jobs = conf.run_defaults['jobs']
    tasks = [(grid.cell_document(c, d), c, d) for c, d in grid.cells()]
    logger.info("scanning %d cells with %d workers", len(tasks), jobs)
    out = None
    if out_path is not None:
        out = writers.CsvWriter(out_path, writers.SCAN_COLUMNS,
                                overwrite=True)
    rows = []
    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for row in pool.map(_run_cell, tasks):
                    rows.append(row)
                    if out is not None:
                        out.write_row(row)
                        out.flush()
        else:
            for row in map(_run_cell, tasks):
                rows.append(row)
                if out is not None:
                    out.write_row(row)
                    out.flush()
    finally:
        if out is not None:
            out.close()
    failures = sum(1 for r in rows if r.get('error'))
    if failures:
        logger.warning("%d of %d scan cells failed", failures, len(rows))
    return ScanResult(rows, failures)


# ---------------------------------------------------------------- presets

SIGMA_Z2 = {'ct': 0.0, 'cx': 0.0, 'cy': 0.0, 'cz': 2.0}
SIGMA_XZ = {'ct': 0.0, 'cx': 1.0, 'cy': 0.0, 'cz': 1.0}
IDENTITY2 = {'ct': 2.0, 'cx': 0.0, 'cy': 0.0, 'cz': 0.0}

UNEVEN_RHO = [[0.16, 0.08, 0.06], [0.23, 0.3, 0.17]]
EVEN_RHO = [[0.2, 0.1, 0.2], [0.2, 0.1, 0.2]]

PHI_OFFSET = [[0.0, 0.0, 0.0], [np.pi / 2, np.pi / 2, np.pi / 2]]
PHI_SCALE = [[0.0, 1.0, 2.0], [1.0, 0.0, 0.5]]

MASTERPLOT_C = [0.5, 1, 2, 5, 10, 25, 50, 100, 250, 1000]
MASTERPLOT_DPHI0 = list(np.logspace(-3, np.log10(2), 20))
MASTERPLOT2_C = [2, 5, 25, 100, 250, 1000]


def template_phases(dphi0):
    "The three-phase-per-value initial phases for separation ``dphi0``"
    return [[o + s * dphi0 for o, s in zip(og, sg)]
            for og, sg in zip(PHI_OFFSET, PHI_SCALE)]


def table_document(kernel, hamiltonian=SIGMA_Z2, rho=UNEVEN_RHO,
                   dphi0=0.001 * np.pi, phi=None, name=None):
    """Experiment document of the spin-1/2 runs with three phases per value"""
    return {'name': name or kernel,
            'hamiltonian': dict(hamiltonian),
            'kernel': kernel,
            'model': 'a',
            'initial': {'rho': [list(g) for g in rho],
                        'phi': phi if phi is not None
                        else template_phases(dphi0)},
            'integrator': {'dt': 1e-3, 't_end': 1000.0,
                           'snapshot_stride': 100, 'mode': 'fixed'},
            'diagnostics': {'horizon': 1000.0}}


def _table1():
    return [('flat', table_document('flat')),
            ('cosine', table_document('cosine')),
            ('spiked_100', table_document('spiked:100'))]


def _table4():
    return [('cosine_uneven_xz',
             table_document('cosine', SIGMA_XZ, dphi0=0.1 * np.pi)),
            ('spiked_100_even_xz',
             table_document('spiked:100', SIGMA_XZ, EVEN_RHO,
                            dphi0=0.1 * np.pi)),
            ('spiked_100_uneven_z',
             table_document('spiked:100', SIGMA_Z2, dphi0=0.1 * np.pi))]


def _table5():
    return [('cosine_xz', table_document('cosine', SIGMA_XZ, dphi0=1.0)),
            ('spiked_100_z', table_document('spiked:100', SIGMA_Z2,
                                            dphi0=1.0))]


def _table6():
    return [('cosine', table_document('cosine', IDENTITY2)),
            ('spiked_100', table_document('spiked:100', IDENTITY2))]


def _masterplot2():
    return [('c_{}'.format(c), table_document('spiked:{}'.format(c)))
            for c in MASTERPLOT2_C]


def _scan_document(c, dphi0, name):
    template = table_document('flat')
    del template['kernel']
    del template['initial']['phi']
    return {'name': name, 'template': template,
            'scan': {'c': list(c), 'dphi0': list(dphi0),
                     'phi_template': {'offset': PHI_OFFSET,
                                      'scale': PHI_SCALE}}}


Preset = namedtuple('Preset', ['name', 'description', 'runs', 'scan'])

PRESETS = {
    'table1': Preset('table1', "flat, cosine and spiked(100) kernels at "
                     "dphi0 = 0.001 pi under H = 2 sigma_z", _table1, None),
    'table3': Preset('table3', "phase dispersion decay of the table1 runs",
                     _table1, None),
    'table4_moderate': Preset('table4_moderate', "moderate separation "
                              "dphi0 = 0.1 pi, uneven and even weights",
                              _table4, None),
    'table5_large': Preset('table5_large', "large separation dphi0 = 1",
                           _table5, None),
    'table6_identity': Preset('table6_identity', "H = 2 I", _table6, None),
    'masterplot': Preset('masterplot', "(c, dphi0) convergence phase "
                         "diagram", None,
                         lambda: _scan_document(MASTERPLOT_C,
                                                MASTERPLOT_DPHI0,
                                                'masterplot')),
    'masterplot2': Preset('masterplot2', "convergence exponent n(t) for "
                          "c in {2, 5, 25, 100, 250, 1000}", _masterplot2,
                          None),
}


def preset_documents(name):
    """Documents of a preset: a list of (run name, experiment document)
    or a single scan document"""
    try:
        preset = PRESETS[name]
    except KeyError:
        raise ConfigurationError("unknown preset {!r}; available: {}".format(
            name, ', '.join(sorted(PRESETS))))
    if preset.scan is not None:
        return preset.scan()
    return preset.runs()


def _apply_overrides(doc, model=None, seed=None, integrator=None):
    doc = copy.deepcopy(doc)
    if model is not None:
        doc['model'] = model
    if seed is not None:
        doc['seed'] = seed
    if integrator:
        doc.setdefault('integrator', {}).update(integrator)
        if 't_end' in integrator:
            doc.setdefault('diagnostics', {})['horizon'] = min(
                doc.get('diagnostics', {}).get('horizon', np.inf),
                integrator['t_end'])
    return doc


ReproduceResult = namedtuple('ReproduceResult', ['runs', 'scan'])


def reproduce(name, out_dir, jobs=None, model=None, seed=None,
              integrator=None):
    """Run a named preset, writing its artifacts below ``out_dir/name``

    Returns
    -------
    ReproduceResult
        ``runs`` maps run names to RunResult (run presets); ``scan`` is the
        ScanResult of scan presets.
    """
    docs = preset_documents(name)
    target = op.join(out_dir, name)
    _make_sure_path_exists(target)
    if isinstance(docs, dict):
        if model is not None or seed is not None or integrator:
            docs = dict(docs, template=_apply_overrides(
                docs['template'], model, seed, integrator))
        grid = ScanGrid.from_dict(docs)
        result = scan_phase_space(grid, op.join(target, 'scan.csv'), jobs)
        writers.write_json(op.join(target, 'manifest.json'),
                           {'preset': name, 'version': _version(),
                            'cells': len(grid), 'failures': result.failures,
                            'scan': docs})
        return ReproduceResult({}, result)

    runs = {}
    for run_name, doc in docs:
        doc = _apply_overrides(doc, model, seed, integrator)
        cfg = ExperimentConfig(doc)
        runs[run_name] = run_experiment(cfg, op.join(target, run_name),
                                        preset=name)
    writers.write_json(op.join(target, 'manifest.json'),
                       {'preset': name, 'version': _version(),
                        'runs': {k: {'config_hash': v.manifest['config_hash'],
                                     'classification':
                                     v.report['classification'],
                                     'decay_class': v.report['decay_class']}
                                 for k, v in runs.items()}})
    return ReproduceResult(runs, None)
