from __future__ import (absolute_import, division, print_function,
                        unicode_literals)

import numpy as np
import pytest
from numpy.testing import assert_allclose

from realensemble.core import DomainError
from realensemble.diagnostics import (CONVERGED, DIVERGED, EXPONENTIAL,
                                      MARGINAL, PARTIAL, POWER_LAW,
                                      InsufficientSeriesError, analyze,
                                      classify_convergence,
                                      convergence_exponent, corrected_energy,
                                      decay_class, dispersion_series,
                                      effective_energy, fit_sigma,
                                      mean_phase_series, minimum_energy,
                                      mode_energy, occupation_number,
                                      phase_dispersion, power_spectrum_estimate,
                                      qm_deviation, qm_value_probabilities,
                                      vacuum_energy_estimate,
                                      variance_decay_exponent)
from realensemble.ensemble import EnsembleState, EvolutionLaw
from realensemble.integrate import IntegratorControls, Trajectory, evolve
from realensemble.kernels import CosineKernel, SpikedKernel

from .utils import random_state, sigma_xz, sigma_z2, unit_coupling

PI = np.pi
T = np.logspace(0, 3, 301)


def _spread_trajectory(sigma):
    "Value 0 holds two equal-weight phases at +-sigma(t), value 1 one phase"
    sigma = np.asarray(sigma, dtype=float)
    ones = np.ones_like(sigma)
    phi = np.column_stack([sigma, -sigma, 0.5 * ones])
    rho = np.column_stack([0.25 * ones, 0.25 * ones, 0.5 * ones])
    return Trajectory(T, phi, rho, [0, 0, 1], 2)


@pytest.mark.parametrize('entries,expected', [
    ([(0, 0.3, 0.4), (1, 2.0, 0.6)], [0, 0]),
    ([(0, 0, 0.25), (0, 0.2, 0.25), (1, 1, 0.5)], [0.1, 0]),
    ([(0, 0, 0.125), (0, 0.4, 0.375), (1, 1, 0.5)], [np.sqrt(0.03), 0]),
    # wraps through pi
    ([(0, PI - 0.05, 0.25), (0, -PI + 0.05, 0.25), (1, 1, 0.5)], [0.05, 0]),
])
def test_phase_dispersion(entries, expected):
    s = EnsembleState.from_entries(entries)
    assert_allclose(phase_dispersion(s), expected, rtol=1e-10, atol=1e-15)


def test_dispersion_of_empty_value():
    s = EnsembleState.from_entries([(0, 0, 1.0), (1, 0.5, 0.0)])
    sigma = phase_dispersion(s)
    assert sigma[0] == 0
    assert np.isnan(sigma[1])


def test_dispersion_shift_invariance(rng):
    for _ in range(20):
        s = random_state(rng, dim=3, max_per_value=4)
        shift = rng.uniform(-10, 10)
        shifted = s.replace(phi=s.phi + shift)
        assert_allclose(phase_dispersion(shifted), phase_dispersion(s),
                        atol=1e-12)


def test_dispersion_and_mean_series():
    traj = _spread_trajectory(0.01 / T)
    sigma = dispersion_series(traj)
    assert sigma.shape == (len(T), 2)
    assert_allclose(sigma[:, 0], 0.01 / T, rtol=1e-9)
    assert_allclose(sigma[:, 1], 0, atol=1e-15)
    means = mean_phase_series(traj)
    assert_allclose(means[:, 0], 0, atol=1e-15)
    assert_allclose(means[:, 1], 0.5)


def test_exponent_of_inverse_time():
    centers, n = convergence_exponent(T, 3 / T)
    assert len(centers) > 10
    assert_allclose(n, -1, atol=1e-10)


@pytest.mark.parametrize('p', [0.1, 0.2, 0.5, 1, 2, 3])
def test_exponent_recovers_power_law(p):
    _, n = convergence_exponent(T, 2 * T ** -p)
    assert_allclose(n, -p, atol=1e-3)


def test_exponent_of_exponential_decay():
    t = np.linspace(0.1, 10, 2000)
    centers, n = convergence_exponent(t, np.exp(-t))
    assert len(n) > 5
    assert np.all(np.diff(n) < 0)
    # d ln sigma / d ln t = -t
    assert_allclose(n, -centers, rtol=0.2)


def test_exponent_skips_zero_windows():
    sigma = 0.01 / T
    sigma[T > 100] = 0
    centers, n = convergence_exponent(T, sigma)
    assert np.all(centers * 10 ** 0.25 <= 100 * (1 + 1e-9))
    assert_allclose(n, -1, atol=1e-10)
    assert convergence_exponent([1.0], [1.0])[0].size == 0


def test_classify_converged():
    result = classify_convergence(T, 0.01 / T)
    assert result.label == CONVERGED
    assert str(result) == CONVERGED
    value = result.per_value[0]
    assert_allclose(value.n_at_horizon, -1, atol=1e-10)
    assert not value.slow
    assert not value.late


def test_classify_slow_convergence():
    result = classify_convergence(T, 0.01 * T ** -0.3)
    assert result.label == CONVERGED
    assert result.per_value[0].slow


def test_classify_diverged():
    result = classify_convergence(T, 0.6 + 0.1 * np.sin(T))
    assert result.label == DIVERGED
    assert result.n_at_horizon() is None


def test_classify_marginal():
    result = classify_convergence(T, 0.01 * T ** -0.1)
    assert result.label == MARGINAL
    assert_allclose(result.n_at_horizon(), -0.1, atol=1e-10)


def test_classify_partial():
    sigma = np.column_stack([0.01 / T, 0.01 * T ** -0.1])
    result = classify_convergence(T, sigma)
    assert result.label == PARTIAL
    assert result.per_value_string() == '0:Converged;1:Marginal'
    assert_allclose(result.n_at_horizon(), -0.1, atol=1e-10)


def test_classify_below_floor():
    result = classify_convergence(T, T ** -4.0)
    assert result.label == CONVERGED
    assert result.per_value[0].n_at_horizon is None


def test_classify_skips_empty_values():
    sigma = np.column_stack([0.01 / T, np.full(len(T), np.nan)])
    result = classify_convergence(T, sigma)
    assert list(result.per_value) == [0]
    with pytest.raises(InsufficientSeriesError):
        classify_convergence(T, np.full(len(T), np.nan))


def test_classify_insufficient_series():
    with pytest.raises(InsufficientSeriesError):
        classify_convergence(T[T <= 500], 0.01 / T[T <= 500])
    with pytest.raises(InsufficientSeriesError):
        classify_convergence([1.0, 2.0, 1000.0], [0.1, 0.05, 1e-4])


@pytest.mark.parametrize('alpha', [0.1, 10])
def test_classification_time_scaling(alpha):
    for sigma in (0.01 / T, 0.01 * T ** -0.1, 0.01 * T ** -0.3):
        base = classify_convergence(T, sigma)
        scaled = classify_convergence(alpha * T, sigma, horizon=alpha * 1000)
        assert scaled.label == base.label
        assert_allclose(scaled.n_at_horizon(), base.n_at_horizon(),
                        atol=1e-10)


def test_decay_class():
    t = np.linspace(1, 1000, 1000)
    assert decay_class(t, np.exp(-0.01 * t)) == EXPONENTIAL
    assert decay_class(T, T ** -1.5) == POWER_LAW
    assert decay_class(T, 0.01 * T) is None
    assert decay_class(T[:3], T[:3] ** -1.0) is None


def test_variance_decay_exponent():
    assert_allclose(variance_decay_exponent(T, 1e-4 * T ** -2.0), 1)
    assert_allclose(variance_decay_exponent(T, T ** -3.0, t_min=10,
                                            t_max=100), 1.5)
    with pytest.raises(InsufficientSeriesError):
        variance_decay_exponent([1, 2], [1, 0.5])


def _cluster_state(spread, n=21):
    z = np.linspace(-3, 3, n)
    w = np.exp(-0.5 * z ** 2)
    return EnsembleState(np.zeros(n, dtype=int), spread * z, w / w.sum())


@pytest.mark.slow
def test_diagonal_variance_decays_as_inverse_square():
    law = EvolutionLaw(unit_coupling(), SpikedKernel(5), 'a')
    ctl = IntegratorControls(dt=0.01, t_end=1000.0, snapshot_stride=100,
                             mode='fixed')
    traj = evolve(_cluster_state(0.02), law, ctl)
    var = dispersion_series(traj)[:, 0] ** 2
    n = variance_decay_exponent(traj.times, var, t_min=100.0)
    assert abs(2 * n - 2) <= 0.3


@pytest.mark.slow
@pytest.mark.parametrize('spread', [0.011, 0.03, 0.1])
def test_mean_drift_tracks_variance(spread):
    law = EvolutionLaw(unit_coupling(), CosineKernel(), 'a')
    ctl = IntegratorControls(dt=1e-3, t_end=0.2, snapshot_stride=10,
                             mode='fixed')
    traj = evolve(_cluster_state(spread), law, ctl)
    mean = mean_phase_series(traj)[:, 0]
    var = dispersion_series(traj)[:, 0] ** 2
    assert 1e-4 <= var[0] <= 1e-2
    drift = np.gradient(mean, traj.times)
    mid = slice(1, -1)
    assert_allclose(drift[mid] - 1, var[mid], rtol=0.2)


def test_fit_sigma():
    for t in (10.0, 1000.0):
        assert_allclose(fit_sigma(t, 1 / (2 * t), 2), 2)


def test_qm_deviation_of_equilibrium():
    s = EnsembleState([0, 1], [0, PI / 2], [0.3, 0.7])
    traj = evolve(s, EvolutionLaw(sigma_xz(), 'cosine'),
                  IntegratorControls(dt=1e-3, t_end=10.0, snapshot_stride=500,
                                     mode='fixed'))
    assert np.max(qm_deviation(traj, sigma_xz())) <= 1e-8
    reference = qm_value_probabilities(traj, sigma_xz())
    assert reference.shape == (len(traj), 2)
    assert_allclose(reference.sum(axis=1), 1, atol=1e-12)


def test_qm_deviation_small_initial_spread(table1):
    traj = evolve(table1, EvolutionLaw(sigma_xz(), 'cosine'),
                  IntegratorControls(dt=0.01, t_end=100.0,
                                     snapshot_stride=100, mode='fixed'))
    assert np.max(qm_deviation(traj, sigma_xz())) <= 0.01


def test_analyze_synthetic_trajectory():
    traj = _spread_trajectory(0.01 / T)
    report = analyze(traj, sigma_z2(), horizon=1000.0, lam=2.0)
    assert report.classification.label == CONVERGED
    assert report.decay_class == POWER_LAW
    expected = np.sqrt(1 + (2 * 1000 * 1e-5) ** 2 * 3)
    assert_allclose(report.sigma_fit, expected)
    assert report.max_qm_deviation < 1e-12
    doc = report.to_dict()
    assert set(doc) == {'classification', 'n_at_horizon', 'per_value',
                        'sigma_fit', 'decay_class', 'max_qm_deviation'}
    assert doc['per_value']['0']['classification'] == CONVERGED
    assert set(doc['per_value']['0']) == {'classification', 'n_at_horizon',
                                          'slow', 'late', 'exponent_centers',
                                          'exponent'}


def test_effective_energy():
    assert effective_energy(2, 0) == 2
    assert_allclose(effective_energy(2, 0.01), 2.02)
    with pytest.raises(DomainError):
        effective_energy(2, -0.1)


def test_power_spectrum_estimate():
    k = 1e-5
    assert_allclose(power_spectrum_estimate(k, 1e4, 0.0),
                    k ** 2 / (16 * PI ** 2 * np.sqrt(3)))
    for var0 in (1.0, 4.0, 0.01):
        t = 1e4 * np.sqrt(var0)
        assert_allclose(power_spectrum_estimate(0.0, t, var0), 2.19e-10,
                        rtol=5e-3)


@pytest.mark.parametrize('T_TeV,var0,expected', [
    (1, 1, 14),
    (1, 0, 0),
    (2, 1, 3584),
])
def test_vacuum_energy_estimate(T_TeV, var0, expected):
    assert_allclose(vacuum_energy_estimate(T_TeV, var0), expected)


def test_energy_minimum():
    t, var0 = 50.0, 0.04
    E = np.linspace(1e-4, 0.1, 100001)
    assert_allclose(np.min(corrected_energy(E, t, var0)),
                    minimum_energy(t, var0), rtol=1e-6)
    k = 2.0
    assert_allclose(occupation_number(k, t, var0),
                    var0 / (2 * (mode_energy(k) * t) ** 2))
    assert_allclose(mode_energy(2 * np.sqrt(3)), 1)
