from __future__ import (absolute_import, division, print_function,
                        unicode_literals)

import csv
import json
import logging
import os.path as op

import numpy as np

from .core import wrap_phase
from .utils import _make_sure_path_exists

logger = logging.getLogger(__name__)


TRAJECTORY_COLUMNS = ('t', 'a', 'phase_index_within_value', 'phi', 'rho',
                      'sigma_phi', 'exponent')
VALUE_COLUMNS = ('t', 'a', 'rho_a', 'rho_a_qm', 'deviation')
PHASE_DIFFERENCE_COLUMNS = ('t', 'a', 'phase_index_within_value',
                            'dphi_from_mean')
SCAN_COLUMNS = ('c', 'dphi0', 'classification', 'n_at_horizon', 'per_value',
                'error')
EVENT_COLUMNS = ('t', 'event', 'from_type', 'to_type', 'count')
POPULATION_COLUMNS = ('t', 'a', 'phase_index_within_value', 'phi', 'rho')


class WriterBase(object):
    """
    Base-class for artifact writers providing the boiler plate to make
    them usable as context managers.

    Parameters
    ----------
    fpath : str
        Path (including filename) of the file to write

    overwrite : bool, optional
        Replace an existing file instead of raising
    """
    def __init__(self, fpath, overwrite=False):
        if op.exists(fpath) and not overwrite:
            raise IOError("the requested file {} already exists".format(
                fpath))
        _make_sure_path_exists(op.dirname(op.abspath(fpath)))
        self._fpath = fpath

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        self.close()

    def close(self):
        pass


class CsvWriter(WriterBase):
    """Rows of a fixed set of columns

    Floats are written with ``repr`` so reruns are byte-identical.
    """
    def __init__(self, fpath, columns, overwrite=False):
        super(CsvWriter, self).__init__(fpath, overwrite)
        self.columns = tuple(columns)
        self._fh = open(fpath, 'w', newline='')
        self._writer = csv.writer(self._fh, lineterminator='\n')
        self._writer.writerow(self.columns)
        self.rows = 0

    def write_row(self, row):
        if isinstance(row, dict):
            row = [row.get(c) for c in self.columns]
        if len(row) != len(self.columns):
            raise ValueError("expected {} fields, got {}".format(
                len(self.columns), len(row)))
        self._writer.writerow(['' if v is None else _plain(v) for v in row])
        self.rows += 1

    def write_rows(self, rows):
        for row in rows:
            self.write_row(row)

    def flush(self):
        self._fh.flush()

    def close(self):
        if not self._fh.closed:
            self._fh.close()


class Hdf5TrajectoryWriter(WriterBase):
    """Trajectory archive with datasets /t, /phi, /rho and /a

    ``attrs`` are stored as file attributes (nested values as JSON).
    """
    def __init__(self, fpath, overwrite=False):
        super(Hdf5TrajectoryWriter, self).__init__(fpath, overwrite)
        import h5py
        self._file = h5py.File(fpath, 'w')

    def write(self, traj, attrs=None):
        self._file.create_dataset('t', data=traj.times)
        self._file.create_dataset('phi', data=traj.phi)
        self._file.create_dataset('rho', data=traj.rho)
        self._file.create_dataset('a', data=traj.a)
        self._file.attrs['dim'] = traj.dim
        for key, value in (attrs or {}).items():
            if isinstance(value, (dict, list, tuple)) or value is None:
                value = json.dumps(value, sort_keys=True)
            self._file.attrs[key] = value

    def close(self):
        if self._file:
            self._file.close()
            self._file = None


def _plain(v):
    if isinstance(v, (np.floating, float)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_, bool)):
        return str(bool(v)).lower()
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        obj = float(obj)
        return obj if np.isfinite(obj) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(fpath, doc, overwrite=True):
    "Write ``doc`` as sorted, indented JSON (NaN and inf become null)"
    if op.exists(fpath) and not overwrite:
        raise IOError("the requested file {} already exists".format(fpath))
    _make_sure_path_exists(op.dirname(op.abspath(fpath)))
    with open(fpath, 'w') as fout:
        json.dump(_jsonable(doc), fout, indent=2, sort_keys=True)
        fout.write('\n')
    logger.debug("wrote %s", fpath)


def write_trajectory_csv(fpath, traj, sigma=None, exponents=None,
                         overwrite=True):
    """One row per (snapshot, entry)

    ``sigma`` is the (n_snapshots, dim) dispersion series and
    ``exponents`` maps each value to its (centers, n) series; the
    exponent column carries the estimate of the nearest window centre.
    """
    index = traj.initial_state.phase_index_within_value()
    nearest = {}
    if exponents is not None:
        for value, (centers, n) in exponents.items():
            if len(centers):
                pos = np.searchsorted(centers, traj.times)
                pos = np.clip(pos, 0, len(centers) - 1)
                left = np.clip(pos - 1, 0, len(centers) - 1)
                closer = (np.abs(centers[left] - traj.times) <
                          np.abs(centers[pos] - traj.times))
                nearest[value] = np.where(closer, n[left], n[pos])
    with CsvWriter(fpath, TRAJECTORY_COLUMNS, overwrite) as out:
        for i, t in enumerate(traj.times):
            for e, value in enumerate(traj.a):
                s = None if sigma is None else sigma[i, value]
                n = nearest[value][i] if value in nearest else None
                out.write_row((t, value, index[e], traj.phi[i, e],
                               traj.rho[i, e],
                               None if s is None or np.isnan(s) else s, n))


def write_value_probabilities(fpath, traj, qm=None, overwrite=True):
    values = traj.value_probabilities()
    with CsvWriter(fpath, VALUE_COLUMNS, overwrite) as out:
        for i, t in enumerate(traj.times):
            for value in range(traj.dim):
                ref = None if qm is None else qm[i, value]
                dev = None if ref is None else abs(values[i, value] - ref)
                out.write_row((t, value, values[i, value], ref, dev))


def write_phase_differences(fpath, traj, means, overwrite=True):
    "Wrapped offsets of every entry from its value's mean phase"
    index = traj.initial_state.phase_index_within_value()
    with CsvWriter(fpath, PHASE_DIFFERENCE_COLUMNS, overwrite) as out:
        for i, t in enumerate(traj.times):
            for e, value in enumerate(traj.a):
                mean = means[i, value]
                d = None
                if np.isfinite(mean):
                    d = wrap_phase(traj.phi[i, e] - mean)
                out.write_row((t, value, index[e], d))


def write_events(fpath, events, overwrite=True):
    with CsvWriter(fpath, EVENT_COLUMNS, overwrite) as out:
        out.write_rows(tuple(e) for e in events)


def write_population(fpath, run, overwrite=True):
    "Population snapshots in the trajectory schema with rho = count / n"
    from .montecarlo import empirical_state
    with CsvWriter(fpath, POPULATION_COLUMNS, overwrite) as out:
        for t, snap in zip(run.times, run.snapshots):
            s = empirical_state(snap)
            index = s.phase_index_within_value()
            for e in range(len(s)):
                out.write_row((t, s.a[e], index[e], s.phi[e], s.rho[e]))


def write_hdf5(fpath, traj, attrs=None, overwrite=True):
    with Hdf5TrajectoryWriter(fpath, overwrite) as out:
        out.write(traj, attrs)
