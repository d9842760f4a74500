"""
Time integration of ensemble states: classical Runge-Kutta steps with an
optional step-doubling error control, and the recorded trajectory.
"""
from __future__ import (absolute_import, division, print_function,
                        unicode_literals)

import logging
from collections import namedtuple

import numpy as np

from . import conf
from .core import ConfigurationError, IntegrationError
from .ensemble import EnsembleState

logger = logging.getLogger(__name__)

RENORMALIZATION_THRESHOLD = 1e-9
MIN_ADAPTIVE_STEP = 1e-12
MODES = ('fixed', 'adaptive')


class IntegrationFailure(IntegrationError):
    def __init__(self, t, detail='non-finite value in update'):
        self.t = t
        super(IntegrationFailure, self).__init__(
            "{} at t = {!r}".format(detail, t))


class StiffnessError(IntegrationError):
    def __init__(self, t, dt):
        self.t = t
        self.dt = dt
        super(StiffnessError, self).__init__(
            "adaptive step collapsed to {!r} at t = {!r}; the system looks "
            "stiff at these parameters".format(dt, t))


class IntegratorControls(namedtuple('IntegratorControls',
                                    ['dt', 't_end', 'snapshot_stride',
                                     'tolerance', 'mode'])):
    """Step size, horizon and output cadence of an integration

    Parameters
    ----------
    dt : float
        Step for fixed mode, initial step for adaptive mode

    t_end : float
        Final time

    snapshot_stride : int
        Record a snapshot every this many accepted steps

    tolerance : float
        Per-step relative error target in adaptive mode

    mode : {'fixed', 'adaptive'}
    """
    __slots__ = ()

    def __new__(cls, dt=None, t_end=None, snapshot_stride=None,
                tolerance=None, mode=None):
        defaults = conf.run_defaults
        dt = float(defaults['dt'] if dt is None else dt)
        t_end = float(defaults['t_end'] if t_end is None else t_end)
        snapshot_stride = int(defaults['snapshot_stride']
                              if snapshot_stride is None else snapshot_stride)
        tolerance = float(defaults['tolerance']
                          if tolerance is None else tolerance)
        mode = str(defaults['mode'] if mode is None else mode).lower()
        problems = []
        if not dt > 0:
            problems.append("dt must be positive")
        if not t_end > 0:
            problems.append("t_end must be positive")
        if snapshot_stride < 1:
            problems.append("snapshot_stride must be a positive integer")
        if not tolerance > 0:
            problems.append("tolerance must be positive")
        if mode not in MODES:
            problems.append("mode must be one of {}".format(MODES))
        if problems:
            raise ConfigurationError("Invalid integrator controls: " +
                                     "; ".join(problems))
        return super(IntegratorControls, cls).__new__(
            cls, dt, t_end, snapshot_stride, tolerance, mode)


class IntegrationStats(object):
    "Counters collected while stepping"
    def __init__(self):
        self.steps = 0
        self.rejected = 0
        self.renormalizations = 0
        self.floor_crossings = 0
        self.clipped = 0
        self.max_sum_error = 0.0
        self.min_dt = np.inf

    @property
    def trust_flag(self):
        "True once any probability has dropped below the floor"
        return self.floor_crossings > 0

    def to_dict(self):
        return {'steps': self.steps,
                'rejected_steps': self.rejected,
                'renormalizations': self.renormalizations,
                'floor_crossings': self.floor_crossings,
                'clipped_probabilities': self.clipped,
                'max_sum_error': self.max_sum_error,
                'min_dt': None if np.isinf(self.min_dt) else self.min_dt}


class Trajectory(object):
    """Snapshots of an evolving ensemble

    Parameters
    ----------
    times : array_like
        Strictly increasing snapshot times

    phi, rho : array_like
        (n_snapshots, n_entries) phases and probabilities

    a : array_like
        Observable value of each entry

    dim : int

    trust_flag : bool
        Set when any probability crossed the floor

    stats : IntegrationStats, optional
    """
    def __init__(self, times, phi, rho, a, dim, trust_flag=False,
                 stats=None):
        self.times = np.asarray(times, dtype=float)
        self.phi = np.asarray(phi, dtype=float)
        self.rho = np.asarray(rho, dtype=float)
        self.a = np.asarray(a, dtype=int)
        self.dim = int(dim)
        self.trust_flag = bool(trust_flag)
        self.stats = stats if stats is not None else IntegrationStats()
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("snapshot times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def state(self, i):
        return EnsembleState(self.a, self.phi[i], self.rho[i], dim=self.dim,
                             validate=False)

    @property
    def states(self):
        return [self.state(i) for i in range(len(self))]

    @property
    def initial_state(self):
        return self.state(0)

    @property
    def final_state(self):
        return self.state(-1)

    def value_probabilities(self):
        "(n_snapshots, dim) total probability of each value"
        out = np.zeros((len(self), self.dim))
        for value in range(self.dim):
            out[:, value] = self.rho[:, self.a == value].sum(axis=1)
        return out

    def sum_error(self):
        "|sum(rho) - 1| at every snapshot"
        return np.abs(self.rho.sum(axis=1) - 1)

    def rescaled_time(self, alpha):
        """Times at which the evolution under alpha * H passes through
        the same states"""
        return self.times / alpha

    def __repr__(self):
        return ('{0.__class__.__name__}(n_snapshots={1}, t_end={2!r}, '
                'trust_flag={0.trust_flag})'.format(self, len(self),
                                                    self.times[-1]))


def _rk4(law, a, phi, rho, dt):
    k1p, k1r = law.rates(a, phi, rho)
    k2p, k2r = law.rates(a, phi + 0.5 * dt * k1p, rho + 0.5 * dt * k1r)
    k3p, k3r = law.rates(a, phi + 0.5 * dt * k2p, rho + 0.5 * dt * k2r)
    k4p, k4r = law.rates(a, phi + dt * k3p, rho + dt * k3r)
    phi = phi + dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
    rho = rho + dt / 6 * (k1r + 2 * k2r + 2 * k3r + k4r)
    return phi, rho


def _settle(phi, rho, before, floor, t, stats):
    if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(rho))):
        raise IntegrationFailure(t)
    crossed = (before >= floor) & (rho < floor)
    negative = rho < 0
    if negative.any():
        stats.clipped += int(negative.sum())
        logger.warning("clipping %d negative probabilities at t = %r "
                       "(most negative %g)", negative.sum(), t,
                       rho[negative].min())
        rho = np.where(negative, 0.0, rho)
    if crossed.any():
        stats.floor_crossings += int(crossed.sum())
        logger.warning("%d probabilities dropped below the floor %g at "
                       "t = %r; results past this point are not trusted",
                       crossed.sum(), floor, t)
    error = abs(rho.sum() - 1)
    stats.max_sum_error = max(stats.max_sum_error, error)
    if error > RENORMALIZATION_THRESHOLD:
        stats.renormalizations += 1
        logger.warning("renormalizing probabilities at t = %r "
                       "(sum off by %g)", t, error)
        rho = rho / rho.sum()
    return phi, rho


def step(s, rhs, dt, stats=None, t=0.0):
    """Advance ``s`` by one classical Runge-Kutta step

    Parameters
    ----------
    s : EnsembleState

    rhs : EvolutionLaw

    dt : float

    stats : IntegrationStats, optional
        Updated in place with renormalization and floor crossing counts

    t : float, optional
        Time of ``s``, only used in error reports

    Returns
    -------
    EnsembleState
    """
    if not dt > 0:
        raise ConfigurationError("dt must be positive")
    if stats is None:
        stats = IntegrationStats()
    phi, rho = _rk4(rhs, s.a, s.phi, s.rho, dt)
    phi, rho = _settle(phi, rho, s.rho, getattr(rhs, 'floor', 0.0),
                       t + dt, stats)
    stats.steps += 1
    return s.replace(phi=phi, rho=rho)


def _fixed(s0, rhs, ctl, stats, record):
    a, phi, rho = s0.a, s0.phi, s0.rho
    floor = getattr(rhs, 'floor', 0.0)
    n_steps = int(np.ceil(ctl.t_end / ctl.dt - 1e-9))
    t = 0.0
    for k in range(1, n_steps + 1):
        t_next = ctl.t_end if k == n_steps else k * ctl.dt
        new_phi, new_rho = _rk4(rhs, a, phi, rho, t_next - t)
        phi, rho = _settle(new_phi, new_rho, rho, floor, t_next, stats)
        stats.steps += 1
        stats.min_dt = min(stats.min_dt, t_next - t)
        t = t_next
        if k % ctl.snapshot_stride == 0 or k == n_steps:
            record(t, phi, rho)


def _adaptive(s0, rhs, ctl, stats, record):
    a, phi, rho = s0.a, s0.phi, s0.rho
    floor = getattr(rhs, 'floor', 0.0)
    t = 0.0
    h = ctl.dt
    accepted = 0
    last_recorded = 0.0
    while t < ctl.t_end:
        h = min(h, ctl.t_end - t)
        full_phi, full_rho = _rk4(rhs, a, phi, rho, h)
        half_phi, half_rho = _rk4(rhs, a, phi, rho, 0.5 * h)
        two_phi, two_rho = _rk4(rhs, a, half_phi, half_rho, 0.5 * h)
        if not (np.all(np.isfinite(two_phi)) and
                np.all(np.isfinite(full_phi))):
            err = np.inf
        else:
            y2 = np.concatenate([two_phi, two_rho])
            y1 = np.concatenate([full_phi, full_rho])
            scale = ctl.tolerance * max(1.0, np.max(np.abs(y2)))
            err = np.max(np.abs(y2 - y1)) / 15 / scale
        if err <= 1:
            t_next = t + h if ctl.t_end - (t + h) > 1e-12 else ctl.t_end
            phi, rho = _settle(two_phi, two_rho, rho, floor, t_next, stats)
            stats.steps += 1
            stats.min_dt = min(stats.min_dt, h)
            t = t_next
            accepted += 1
            if accepted % ctl.snapshot_stride == 0 or t >= ctl.t_end:
                if t > last_recorded:
                    record(t, phi, rho)
                    last_recorded = t
        else:
            stats.rejected += 1
        if err == 0:
            factor = 4.0
        elif np.isinf(err):
            factor = 0.1
        else:
            factor = min(4.0, max(0.1, 0.9 * err ** -0.2))
        h = h * factor
        if h < MIN_ADAPTIVE_STEP and t < ctl.t_end:
            raise StiffnessError(t, h)


def evolve(s0, rhs, ctl):
    """Integrate ``s0`` to ``ctl.t_end``

    Parameters
    ----------
    s0 : EnsembleState

    rhs : EvolutionLaw

    ctl : IntegratorControls

    Returns
    -------
    Trajectory
        Snapshots at t = 0, every ``ctl.snapshot_stride`` accepted steps
        and at ``ctl.t_end``.
    """
    stats = IntegrationStats()
    times = [0.0]
    phis = [s0.phi.copy()]
    rhos = [s0.rho.copy()]

    def record(t, phi, rho):
        times.append(t)
        phis.append(phi)
        rhos.append(rho)

    logger.info("evolving %d entries to t = %r (%s mode, dt = %r) under %r",
                len(s0), ctl.t_end, ctl.mode, ctl.dt, rhs)
    if ctl.mode == 'fixed':
        _fixed(s0, rhs, ctl, stats, record)
    else:
        _adaptive(s0, rhs, ctl, stats, record)
    logger.info("finished after %d steps (%d renormalizations, %d floor "
                "crossings)", stats.steps, stats.renormalizations,
                stats.floor_crossings)
    return Trajectory(times, phis, rhos, s0.a, s0.dim,
                      trust_flag=stats.trust_flag, stats=stats)
