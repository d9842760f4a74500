"""
Finite-N realization of the ensemble.

Members are grouped into types sharing both beables (a, phi).  Each step
moves every phase with the continuous rule and then lets members copy
the beables of other types at rates that reproduce the continuum
probability flow in expectation.  Copying never changes the member count,
and a type that has lost all of its members never gains any back.
"""
from __future__ import (absolute_import, division, print_function,
                        unicode_literals)

import logging
from collections import namedtuple

import numpy as np

from .core import ConfigurationError, IntegrationError
from .ensemble import EnsembleState, EvolutionLaw
from .utils import make_rng

logger = logging.getLogger(__name__)

MAX_TRANSITION_PROBABILITY = 0.1
MERGE_RESOLUTION = 1e-6


class StepTooLargeError(IntegrationError):
    def __init__(self, probability, member_type, t=None):
        self.probability = probability
        self.member_type = member_type
        self.t = t
        super(StepTooLargeError, self).__init__(
            "transition probability {!r} of type {} exceeds {} (t = {!r}); "
            "reduce dt".format(probability, member_type,
                               MAX_TRANSITION_PROBABILITY, t))


Event = namedtuple('Event', ['t', 'event', 'from_type', 'to_type', 'count'])


class Population(object):
    '''Member counts of each (a, phi) type

    Parameters
    ----------
    a : array_like of int
        Observable value of each type

    phi : array_like
        Phase of each type

    count : array_like of int
        Members currently holding the type's beables, may be zero

    dim : int
        Number of observable values
    '''
    def __init__(self, a, phi, count, dim):
        self.a = np.array(a, dtype=int)
        self.phi = np.array(phi, dtype=float)
        self.count = np.array(count, dtype=np.int64)
        self.dim = int(dim)
        if not (self.a.shape == self.phi.shape == self.count.shape):
            raise ConfigurationError("a, phi and count need one value per "
                                     "type")
        if np.any(self.count < 0):
            raise ConfigurationError("member counts must be non-negative")
        if self.n < 1:
            raise ConfigurationError("a population needs at least one member")

    @property
    def n(self):
        return int(self.count.sum())

    @property
    def rho(self):
        "Fraction of the members in each type"
        return self.count / self.n

    def value_probabilities(self):
        return np.bincount(self.a, weights=self.rho, minlength=self.dim)

    def copy(self):
        return Population(self.a, self.phi, self.count, self.dim)

    def __repr__(self):
        return '{0.__class__.__name__}(n={0.n}, types={1})'.format(
            self, len(self.a))


def sample_initial_ensemble(s, n, rng=None):
    """Draw ``n`` members over the entries of ``s``

    Every entry becomes a type, those that drew no members start out
    extinct.
    """
    if n < 1:
        raise ConfigurationError("need at least one member")
    rng = make_rng(rng)
    p = s.rho / s.rho.sum()
    counts = rng.multinomial(int(n), p)
    return Population(s.a, s.phi, counts, s.dim)


def _law(m, k, model, law):
    if law is not None:
        return law
    return EvolutionLaw(m, k, model)


def mc_step(p, m, k, dt, rng, model='a', t=0.0, events=None, law=None):
    """Advance a population by ``dt``

    Parameters
    ----------
    p : Population

    m : CouplingMatrix

    k : Kernel or str

    dt : float

    rng : numpy.random.Generator

    model : {'a', 'b'}, optional

    t : float, optional
        Time of ``p``, stamped on events

    events : list, optional
        Copy and extinction events are appended here

    law : EvolutionLaw, optional
        Reused instead of building one from (m, k, model)

    Returns
    -------
    Population
    """
    if not dt > 0:
        raise ConfigurationError("dt must be positive")
    law = _law(m, k, model, law)
    rho = p.rho
    dphi, _ = law.rates(p.a, p.phi, rho)
    flows = law.pair_flows(p.a, p.phi, rho)

    outflow = np.where(flows < 0, -flows, 0.0)
    np.fill_diagonal(outflow, 0.0)
    occupied = p.count > 0
    probs = np.zeros_like(outflow)
    probs[occupied] = outflow[occupied] * dt / rho[occupied, None]
    totals = probs.sum(axis=1)
    worst = int(np.argmax(totals))
    if totals[worst] > MAX_TRANSITION_PROBABILITY:
        raise StepTooLargeError(float(totals[worst]), worst, t)

    transfers = np.zeros(probs.shape, dtype=np.int64)
    for i in np.flatnonzero(occupied & (totals > 0)):
        draw = rng.multinomial(p.count[i],
                               np.append(probs[i], 1 - totals[i]))
        transfers[i] = draw[:-1]

    count = p.count - transfers.sum(axis=1) + transfers.sum(axis=0)
    phi = p.phi + dphi * dt
    t_next = t + dt
    if events is not None:
        for i, j in zip(*np.nonzero(transfers)):
            events.append(Event(t_next, 'copy', int(i), int(j),
                                int(transfers[i, j])))
    extinct = np.flatnonzero(occupied & (count == 0))
    for i in extinct:
        logger.warning("type %d (value %d) went extinct at t = %r", i,
                       p.a[i], t_next)
        if events is not None:
            events.append(Event(t_next, 'extinction', int(i), None, 0))
    return Population(p.a, phi, count, p.dim)


def empirical_state(p, resolution=MERGE_RESOLUTION):
    """EnsembleState with rho = count / n

    Occupied types of the same value whose phases lie within
    ``resolution`` of the first phase of a bin merge into one entry at
    the count-weighted mean phase.  Values without members get a single
    empty entry.
    """
    a_out, phi_out, rho_out = [], [], []
    n = p.n
    for value in range(p.dim):
        members = np.flatnonzero((p.a == value) & (p.count > 0))
        if not len(members):
            candidates = np.flatnonzero(p.a == value)
            phase = float(p.phi[candidates[0]]) if len(candidates) else 0.0
            a_out.append(value)
            phi_out.append(phase)
            rho_out.append(0.0)
            continue
        order = members[np.argsort(p.phi[members], kind='mergesort')]
        start = 0
        while start < len(order):
            stop = start + 1
            while (stop < len(order) and
                   p.phi[order[stop]] - p.phi[order[start]] <= resolution):
                stop += 1
            group = order[start:stop]
            weight = p.count[group]
            a_out.append(value)
            phi_out.append(float(np.dot(weight, p.phi[group]) / weight.sum()))
            rho_out.append(weight.sum() / n)
            start = stop
    return EnsembleState(a_out, phi_out, rho_out, dim=p.dim, validate=False)


class PopulationTrajectory(object):
    "Snapshots and the event log of a Monte Carlo run"
    def __init__(self, times, snapshots, events):
        self.times = np.asarray(times, dtype=float)
        self.snapshots = list(snapshots)
        self.events = list(events)

    def value_probabilities(self):
        return np.array([s.value_probabilities() for s in self.snapshots])

    def extinctions(self):
        return [e for e in self.events if e.event == 'extinction']


def run_population(p0, law, dt, t_end, rng, snapshot_stride=1,
                   record_copies=True):
    """Step ``p0`` to ``t_end`` recording snapshots and events

    Parameters
    ----------
    p0 : Population

    law : EvolutionLaw

    dt, t_end : float

    rng : numpy.random.Generator

    snapshot_stride : int, optional

    record_copies : bool, optional
        Copy events can be numerous; extinctions are always recorded.
    """
    n_steps = int(np.ceil(t_end / dt - 1e-9))
    events = []
    times = [0.0]
    snapshots = [p0.copy()]
    p = p0
    t = 0.0
    logger.info("running %d members for %d steps", p0.n, n_steps)
    for step in range(1, n_steps + 1):
        sink = [] if record_copies else None
        before = p.count > 0
        p = mc_step(p, law.coupling, law.kernel, dt, rng, t=t, events=sink,
                    law=law)
        t = step * dt
        if sink:
            events.extend(sink)
        elif not record_copies:
            for i in np.flatnonzero(before & (p.count == 0)):
                events.append(Event(t, 'extinction', int(i), None, 0))
        if step % snapshot_stride == 0 or step == n_steps:
            times.append(t)
            snapshots.append(p.copy())
    return PopulationTrajectory(times, snapshots, events)
