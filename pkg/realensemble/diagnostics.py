"""
Convergence measures for trajectories.

The phase dispersion sigma_phi of each observable value, its logarithmic
time derivative n = d ln sigma_phi / d ln t, the run classification,
the deviation of the per-value probabilities from quantum mechanics and
the closed-form phenomenology estimates.
"""
from __future__ import (absolute_import, division, print_function,
                        unicode_literals)

import logging
from collections import namedtuple

import numpy as np

from .core import (ConfigurationError, DomainError, weighted_circular_mean,
                   wrapped_deviation)
from .ensemble import collapse_to_equilibrium
from .hamiltonian import propagator
from .perturbation import sigma_from_variance

logger = logging.getLogger(__name__)

CONVERGED = 'Converged'
DIVERGED = 'Diverged'
MARGINAL = 'Marginal'
PARTIAL = 'PartialPerValue'
POWER_LAW = 'PowerLaw'
EXPONENTIAL = 'Exponential'

DIVERGENCE_THRESHOLD = 0.5
CONVERGENCE_THRESHOLD = -0.2
SLOW_THRESHOLD = -0.5
SIGMA_FLOOR = 1e-8
WINDOW_DECADES = 0.5
MIN_WINDOW_SAMPLES = 20


class InsufficientSeriesError(ConfigurationError):
    pass


ValueClassification = namedtuple('ValueClassification',
                                 ['classification', 'n_at_horizon', 'slow',
                                  'late'])


class Classification(namedtuple('Classification', ['label', 'per_value'])):
    """Run classification

    ``label`` is Converged, Diverged or Marginal when every observable
    value agrees and PartialPerValue otherwise; ``per_value`` maps each
    value to its ValueClassification.
    """
    __slots__ = ()

    def __str__(self):
        return self.label

    def n_at_horizon(self):
        "Exponent of the slowest converging value"
        ns = [v.n_at_horizon for v in self.per_value.values()
              if v.n_at_horizon is not None]
        return max(ns) if ns else None

    def per_value_string(self):
        return ';'.join('{}:{}'.format(a, v.classification)
                        for a, v in sorted(self.per_value.items()))


def phase_dispersion(s):
    """Probability weighted phase spread of every observable value

    Returns
    -------
    sigma : ndarray
        One entry per value, NaN where the value carries no probability
    """
    out = np.full(s.dim, np.nan)
    for value in range(s.dim):
        members = s.a == value
        rho = s.rho[members]
        total = rho.sum()
        if not total > 0:
            continue
        w = rho / total
        phi = s.phi[members]
        mean = weighted_circular_mean(phi, w)
        d = wrapped_deviation(phi, mean)
        out[value] = np.sqrt(np.sum(w * d * d))
    return out


def dispersion_series(traj):
    "(n_snapshots, dim) sigma_phi along a trajectory"
    return np.array([phase_dispersion(traj.state(i))
                     for i in range(len(traj))])


def mean_phase_series(traj):
    "(n_snapshots, dim) weighted mean phase of each value, unwrapped"
    out = np.full((len(traj), traj.dim), np.nan)
    for i in range(len(traj)):
        for value in range(traj.dim):
            members = traj.a == value
            rho = traj.rho[i, members]
            if rho.sum() > 0:
                out[i, value] = weighted_circular_mean(traj.phi[i, members],
                                                       rho)
    return out


def _fit_slope(x, y):
    return float(np.polyfit(x, y, 1)[0])


def convergence_exponent(t, sigma, window_decades=WINDOW_DECADES,
                         min_samples=MIN_WINDOW_SAMPLES, per_decade=10):
    """Sliding-window estimate of n = d ln sigma / d ln t

    Windows are ``window_decades`` wide in t, centred on a logarithmic
    grid with ``per_decade`` centres per decade.  Windows containing a
    zero dispersion, or fewer than ``min_samples`` samples, are skipped.

    Returns
    -------
    centers, n : ndarray
    """
    t = np.asarray(t, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    keep = (t > 0) & np.isfinite(sigma)
    t, sigma = t[keep], sigma[keep]
    if len(t) < 2:
        return np.array([]), np.array([])
    half = 10 ** (0.5 * window_decades)
    lo, hi = np.log10(t[0] * half), np.log10(t[-1] / half)
    if hi < lo:
        return np.array([]), np.array([])
    count = max(int(np.floor((hi - lo) * per_decade)) + 1, 1)
    centers_out, n_out = [], []
    skipped = 0
    for c in np.logspace(lo, hi, count):
        sel = (t >= c / half * (1 - 1e-12)) & (t <= c * half * (1 + 1e-12))
        if sel.sum() < min_samples:
            continue
        if np.any(sigma[sel] <= 0):
            skipped += 1
            continue
        centers_out.append(c)
        n_out.append(_fit_slope(np.log(t[sel]), np.log(sigma[sel])))
    if skipped:
        logger.info("skipped %d exponent windows containing sigma = 0",
                    skipped)
    return np.array(centers_out), np.array(n_out)


def _check_horizon(t, horizon):
    if len(t) < 3 or t[-1] < horizon * (1 - 1e-9):
        raise InsufficientSeriesError(
            "series must extend to the horizon {!r}, ends at {!r}".format(
                horizon, t[-1] if len(t) else None))


def classify_value(t, sigma, horizon=1000.0, sigma_floor=SIGMA_FLOOR):
    """Classify a single value's sigma_phi series

    Returns
    -------
    ValueClassification
    """
    t = np.asarray(t, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    _check_horizon(t, horizon)
    upto = t <= horizon * (1 + 1e-9)
    t, sigma = t[upto], sigma[upto]
    if np.all(np.isnan(sigma)):
        return ValueClassification(None, None, False, False)

    last_decade = t >= horizon / 10
    if np.nanmax(sigma[last_decade]) >= DIVERGENCE_THRESHOLD:
        return ValueClassification(DIVERGED, None, False, False)

    at_horizon = sigma[-1]
    if at_horizon <= sigma_floor:
        return ValueClassification(CONVERGED, None, False, False)

    window = (t >= horizon / 10 ** WINDOW_DECADES) & (sigma > 0)
    if window.sum() < 3:
        raise InsufficientSeriesError("fewer than three usable samples in "
                                      "the window before the horizon")
    n = _fit_slope(np.log(t[window]), np.log(sigma[window]))
    if n > CONVERGENCE_THRESHOLD:
        return ValueClassification(MARGINAL, n, False, False)

    slow = n > SLOW_THRESHOLD
    centers, series = convergence_exponent(t, sigma)
    below = centers[series <= CONVERGENCE_THRESHOLD]
    late = bool(len(below)) and below[0] > horizon / 2
    return ValueClassification(CONVERGED, n, slow, late)


def classify_convergence(t, sigma, horizon=1000.0, sigma_floor=SIGMA_FLOOR):
    """Classify a run from its sigma_phi series

    Parameters
    ----------
    t : array_like
        Snapshot times

    sigma : array_like
        (n_snapshots,) for one value or (n_snapshots, dim)

    horizon : float
        Time at which the criterion is applied

    Returns
    -------
    Classification
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim == 1:
        sigma = sigma[:, None]
    per_value = {}
    for value in range(sigma.shape[1]):
        result = classify_value(t, sigma[:, value], horizon, sigma_floor)
        if result.classification is not None:
            per_value[value] = result
    labels = set(v.classification for v in per_value.values())
    if not labels:
        raise InsufficientSeriesError("no observable value carries "
                                      "probability")
    label = labels.pop() if len(labels) == 1 else PARTIAL
    return Classification(label, per_value)


def decay_class(t, sigma, sigma_floor=SIGMA_FLOOR, min_samples=5):
    """PowerLaw or Exponential from the last usable decade of the series

    Both ln sigma ~ t and ln sigma ~ ln t are fit; the better fit wins.
    Returns None when the series does not decay.
    """
    t = np.asarray(t, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    usable = np.flatnonzero((t > 0) & np.isfinite(sigma) &
                            (sigma > sigma_floor))
    if len(usable) < min_samples:
        return None
    t_stop = t[usable[-1]]
    sel = usable[t[usable] >= t_stop / 10]
    if len(sel) < min_samples:
        return None
    x, y = t[sel], np.log(sigma[sel])
    if np.ptp(x) == 0:
        return None
    lin = np.polyfit(x, y, 1)
    loglog = np.polyfit(np.log(x), y, 1)
    if lin[0] >= 0 and loglog[0] >= 0:
        return None
    lin_res = np.sum((np.polyval(lin, x) - y) ** 2)
    log_res = np.sum((np.polyval(loglog, np.log(x)) - y) ** 2)
    return EXPONENTIAL if lin_res < log_res else POWER_LAW


def variance_decay_exponent(t, var, t_min=None, t_max=None):
    """n of a <dphi**2> ~ t**(-2 n) fit over [t_min, t_max]"""
    t = np.asarray(t, dtype=float)
    var = np.asarray(var, dtype=float)
    sel = (t > 0) & (var > 0) & np.isfinite(var)
    if t_min is not None:
        sel &= t >= t_min
    if t_max is not None:
        sel &= t <= t_max
    if sel.sum() < 3:
        raise InsufficientSeriesError("need three positive samples to fit "
                                      "the variance decay")
    return -0.5 * _fit_slope(np.log(t[sel]), np.log(var[sel]))


def fit_sigma(t, sigma, lam):
    """Free constant of the rescaled steady state from sigma_phi at ``t``

    The rescaled variance is (lambda t sigma_phi)**2.
    """
    return sigma_from_variance((lam * t * sigma) ** 2, lam)


def qm_deviation(traj, m):
    """sup over values of |rho_a(t) - rho_a^QM(t)| at every snapshot

    The quantum reference starts from the equilibrium collapse of the
    initial state.
    """
    start = collapse_to_equilibrium(traj.initial_state)
    psi0 = np.sqrt(start.rho) * np.exp(-1j * start.phi)
    values = traj.value_probabilities()
    out = np.empty(len(traj))
    for i, t in enumerate(traj.times):
        psi = propagator(m, t).dot(psi0)
        out[i] = np.max(np.abs(values[i] - np.abs(psi) ** 2))
    return out


def qm_value_probabilities(traj, m):
    "(n_snapshots, dim) quantum reference probabilities"
    start = collapse_to_equilibrium(traj.initial_state)
    psi0 = np.sqrt(start.rho) * np.exp(-1j * start.phi)
    return np.array([np.abs(propagator(m, t).dot(psi0)) ** 2
                     for t in traj.times])


class ConvergenceReport(object):
    """Everything the diagnostics know about one trajectory

    Parameters
    ----------
    times : ndarray

    per_value_sigma : ndarray
        (n_snapshots, dim)

    exponent_series : dict
        value -> (centers, n)

    classification : Classification

    sigma_fit : float or None

    decay_class : str or None
    """
    def __init__(self, times, per_value_sigma, exponent_series,
                 classification, sigma_fit=None, decay_class=None,
                 max_qm_deviation=None):
        self.times = times
        self.per_value_sigma = per_value_sigma
        self.exponent_series = exponent_series
        self.classification = classification
        self.sigma_fit = sigma_fit
        self.decay_class = decay_class
        self.max_qm_deviation = max_qm_deviation

    def to_dict(self):
        per_value = {}
        for value, result in self.classification.per_value.items():
            centers, n = self.exponent_series.get(value, ([], []))
            per_value[str(value)] = {
                'classification': result.classification,
                'n_at_horizon': result.n_at_horizon,
                'slow': result.slow,
                'late': result.late,
                'exponent_centers': list(map(float, centers)),
                'exponent': list(map(float, n))}
        return {'classification': self.classification.label,
                'n_at_horizon': self.classification.n_at_horizon(),
                'per_value': per_value,
                'sigma_fit': self.sigma_fit,
                'decay_class': self.decay_class,
                'max_qm_deviation': self.max_qm_deviation}


def analyze(traj, m=None, horizon=1000.0, lam=None,
            sigma_floor=SIGMA_FLOOR):
    """Build the ConvergenceReport of a trajectory

    Parameters
    ----------
    traj : Trajectory

    m : CouplingMatrix, optional
        Enables the deviation from quantum mechanics

    horizon : float

    lam : float, optional
        Kernel curvature parameter; for lambda > 0 the rescaled steady
        state constant is fit at the horizon
    """
    sigma = dispersion_series(traj)
    exponents = {}
    for value in range(traj.dim):
        exponents[value] = convergence_exponent(traj.times, sigma[:, value])
    classification = classify_convergence(traj.times, sigma, horizon,
                                          sigma_floor)
    classes = set()
    for value in classification.per_value:
        if classification.per_value[value].classification == DIVERGED:
            continue
        classes.add(decay_class(traj.times, sigma[:, value], sigma_floor))
    classes.discard(None)
    decay = classes.pop() if len(classes) == 1 else None

    sigma_fit = None
    if lam is not None and lam > 0:
        idx = np.searchsorted(traj.times, horizon * (1 - 1e-9))
        idx = min(idx, len(traj) - 1)
        fits = []
        for value in range(traj.dim):
            s = sigma[idx, value]
            if np.isfinite(s) and s > 0:
                try:
                    fits.append(fit_sigma(traj.times[idx], s, lam))
                except DomainError:
                    pass
        if fits:
            sigma_fit = float(np.mean(fits))

    deviation = None
    if m is not None:
        deviation = float(np.max(qm_deviation(traj, m)))
    return ConvergenceReport(traj.times, sigma, exponents, classification,
                             sigma_fit, decay, deviation)


def effective_energy(H_ii, var_dphi):
    "Diagonal energy with the phase-variance correction"
    if var_dphi < 0:
        raise DomainError("variance must be non-negative")
    return H_ii * (1 + var_dphi)


def power_spectrum_estimate(k_over_Mp, t_Mp, var0):
    """Curvature power spectrum with the phase-variance occupation

    All inputs in Planck units.
    """
    return (k_over_Mp ** 2 / (16 * np.pi ** 2 * np.sqrt(3)) +
            np.sqrt(3) * var0 / (8 * np.pi ** 2 * t_Mp ** 2))


def vacuum_energy_estimate(T_TeV, var0):
    "Vacuum energy in meV^4 for a transition at temperature T (TeV)"
    return 14.0 * np.sqrt(var0) * T_TeV ** 8


def mode_energy(k):
    "Ground-state energy of a radiation-fluid mode, c_s = 1/sqrt(3)"
    return k / (2 * np.sqrt(3))


def occupation_number(k, t, var0):
    "Mean occupation of mode ``k`` implied by the decaying phase variance"
    return var0 / (2 * (mode_energy(k) * t) ** 2)


def corrected_energy(E_qm, t, var0):
    return E_qm + var0 / (E_qm * t ** 2)


def minimum_energy(t, var0):
    "Minimum over E_qm of corrected_energy"
    return 2 * np.sqrt(var0) / t
