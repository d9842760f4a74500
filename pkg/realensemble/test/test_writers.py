from __future__ import (absolute_import, division, print_function,
                        unicode_literals)

import csv
import json
import os.path as op

import numpy as np
import pytest
from numpy.testing import assert_allclose

from realensemble import writers
from realensemble.integrate import Trajectory


def _read_csv(fpath):
    with open(fpath) as fin:
        return list(csv.DictReader(fin))


def _trajectory():
    t = np.array([0.0, 0.5, 1.0])
    phi = np.array([[0.1, 0.3, 2.0],
                    [0.2, 0.4, 2.5],
                    [0.3, 0.5, 3.0]])
    rho = np.array([[0.25, 0.25, 0.5],
                    [0.2, 0.3, 0.5],
                    [0.2, 0.2, 0.6]])
    return Trajectory(t, phi, rho, [0, 0, 1], 2)


def test_csv_rows(tmpdir):
    fpath = str(tmpdir.join('rows.csv'))
    with writers.CsvWriter(fpath, ('x', 'y', 'label')) as out:
        out.write_row((0.1, 2, 'a'))
        out.write_row({'x': np.float64(1 / 3), 'label': 'b'})
        assert out.rows == 2
        with pytest.raises(ValueError):
            out.write_row((1, 2))
    with open(fpath) as fin:
        text = fin.read()
    assert text == 'x,y,label\n0.1,2,a\n{!r},,b\n'.format(1 / 3)


def test_csv_refuses_to_overwrite(tmpdir):
    fpath = str(tmpdir.join('rows.csv'))
    writers.CsvWriter(fpath, ('x',)).close()
    with pytest.raises(IOError):
        writers.CsvWriter(fpath, ('x',))
    writers.CsvWriter(fpath, ('x',), overwrite=True).close()


def test_csv_creates_directories(tmpdir):
    fpath = str(tmpdir.join('deep', 'er', 'rows.csv'))
    with writers.CsvWriter(fpath, ('x',)) as out:
        out.write_row((1.0,))
    assert op.exists(fpath)


def test_write_json(tmpdir):
    fpath = str(tmpdir.join('doc.json'))
    writers.write_json(fpath, {'b': np.array([1.0, np.nan]), 'a': np.int64(3),
                               'c': {1: np.inf, 'ok': np.bool_(True)}})
    with open(fpath) as fin:
        text = fin.read()
    assert json.loads(text) == {'a': 3, 'b': [1.0, None],
                                'c': {'1': None, 'ok': True}}
    assert text.index('"a"') < text.index('"b"')
    with pytest.raises(IOError):
        writers.write_json(fpath, {}, overwrite=False)


def test_trajectory_csv(tmpdir):
    traj = _trajectory()
    fpath = str(tmpdir.join('trajectory.csv'))
    sigma = np.array([[0.1, 0.0], [0.1, 0.0], [np.nan, 0.0]])
    exponents = {0: (np.array([0.4, 0.9]), np.array([-1.0, -2.0]))}
    writers.write_trajectory_csv(fpath, traj, sigma, exponents)
    rows = _read_csv(fpath)
    assert len(rows) == 9
    assert list(rows[0]) == list(writers.TRAJECTORY_COLUMNS)
    assert [r['phase_index_within_value'] for r in rows[:3]] == ['0', '1',
                                                                 '0']
    assert [float(r['phi']) for r in rows[3:6]] == [0.2, 0.4, 2.5]
    # nearest window centre: t = 0 -> 0.4, t = 1 -> 0.9
    assert float(rows[0]['exponent']) == -1.0
    assert float(rows[6]['exponent']) == -2.0
    assert rows[2]['exponent'] == ''
    assert rows[6]['sigma_phi'] == ''
    assert float(rows[8]['sigma_phi']) == 0.0


def test_value_probabilities_csv(tmpdir):
    traj = _trajectory()
    fpath = str(tmpdir.join('values.csv'))
    qm = np.array([[0.5, 0.5], [0.5, 0.5], [0.45, 0.55]])
    writers.write_value_probabilities(fpath, traj, qm)
    rows = _read_csv(fpath)
    assert len(rows) == 6
    assert_allclose([float(r['rho_a']) for r in rows],
                    traj.value_probabilities().ravel())
    assert_allclose(float(rows[4]['deviation']), 0.05)
    writers.write_value_probabilities(fpath, traj)
    assert all(r['rho_a_qm'] == '' for r in _read_csv(fpath))


def test_phase_differences_csv(tmpdir):
    traj = _trajectory()
    fpath = str(tmpdir.join('dphi.csv'))
    means = np.array([[0.2, 2.0], [0.3, 2.5], [0.4, np.nan]])
    writers.write_phase_differences(fpath, traj, means)
    rows = _read_csv(fpath)
    assert_allclose([float(r['dphi_from_mean']) for r in rows[:6]],
                    [-0.1, 0.1, 0, -0.1, 0.1, 0], atol=1e-15)
    assert rows[8]['dphi_from_mean'] == ''


def test_hdf5_archive(tmpdir):
    h5py = pytest.importorskip('h5py')
    traj = _trajectory()
    fpath = str(tmpdir.join('trajectory.h5'))
    writers.write_hdf5(fpath, traj, attrs={'config_hash': 'abc',
                                           'meta': {'k': [1, 2]}})
    with h5py.File(fpath, 'r') as fin:
        assert_allclose(fin['t'][()], traj.times)
        assert_allclose(fin['phi'][()], traj.phi)
        assert_allclose(fin['rho'][()], traj.rho)
        assert list(fin['a'][()]) == [0, 0, 1]
        assert fin.attrs['dim'] == 2
        assert json.loads(fin.attrs['meta']) == {'k': [1, 2]}
