"""
Non-equilibrium ensemble state and the two evolution laws.

An ensemble is a list of entries ``(a, phi, rho)``: the probability
``rho`` that a member of the ensemble holds observable value ``a`` with
phase ``phi``.  Several entries may share a value; quantum equilibrium
is the special case of exactly one entry per value.
"""
from __future__ import (absolute_import, division, print_function,
                        unicode_literals)

import logging
from collections import namedtuple

import numpy as np

from .core import (ConfigurationError, IntegrationError, NormalizationError,
                   wrap_phase, weighted_circular_mean)
from .kernels import parse_kernel

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-9
DEFAULT_FLOOR = 1e-14

MODELS = ('a', 'b')


class SingularConfigurationError(IntegrationError):
    """Raised when the kernel weighted density of an occupied entry vanishes

    Attributes
    ----------
    value : int
        The observable value the offending entry belongs to
    """
    def __init__(self, value, entry=None):
        self.value = int(value)
        self.entry = entry
        msg = ("kernel-weighted density vanished for an occupied entry "
               "of observable value {}".format(self.value))
        if entry is not None:
            msg += " (entry {})".format(entry)
        super(SingularConfigurationError, self).__init__(msg)


Derivatives = namedtuple('Derivatives', ['dphi', 'drho'])


class EnsembleState(object):
    '''Ordered entries (a, phi, rho) of the ensemble

    Parameters
    ----------
    a : array_like of int
        Observable value of each entry, in ``0 .. dim - 1``

    phi : array_like
        Phase of each entry, unwrapped

    rho : array_like
        Probability of each entry

    dim : int, optional
        Number of observable values.  Defaults to ``max(a) + 1``.

    validate : bool, optional
        Check the invariants on construction.  Default True.
    '''
    def __init__(self, a, phi, rho, dim=None, validate=True):
        self.a = np.array(a, dtype=int).ravel()
        self.phi = np.array(phi, dtype=float).ravel()
        self.rho = np.array(rho, dtype=float).ravel()
        if not (len(self.a) == len(self.phi) == len(self.rho)):
            raise ConfigurationError("a, phi and rho need one value per "
                                     "entry")
        if len(self.a) == 0:
            raise ConfigurationError("an ensemble needs at least one entry")
        if dim is None:
            dim = int(self.a.max()) + 1
        self.dim = int(dim)
        if validate:
            problems = self.violations()
            if problems:
                if any('sum' in p or 'negative' in p for p in problems):
                    raise NormalizationError("; ".join(problems))
                raise ConfigurationError("; ".join(problems))

    @classmethod
    def from_entries(cls, entries, dim=None, validate=True):
        """Build from an iterable of ``(a, phi, rho)`` triples"""
        entries = list(entries)
        if not entries:
            raise ConfigurationError("an ensemble needs at least one entry")
        a, phi, rho = zip(*entries)
        return cls(a, phi, rho, dim=dim, validate=validate)

    @classmethod
    def from_groups(cls, rho, phi, validate=True):
        """Build from nested per-value lists

        ``rho[a][k]`` and ``phi[a][k]`` describe the k-th phase of value
        ``a``, the layout used to write down initial conditions.
        """
        if len(rho) != len(phi):
            raise ConfigurationError("rho and phi must list the same "
                                     "observable values")
        a, flat_phi, flat_rho = [], [], []
        for value, (rs, ps) in enumerate(zip(rho, phi)):
            if len(rs) != len(ps):
                raise ConfigurationError(
                    "value {} has {} probabilities but {} phases".format(
                        value, len(rs), len(ps)))
            a.extend([value] * len(rs))
            flat_rho.extend(rs)
            flat_phi.extend(ps)
        return cls(a, flat_phi, flat_rho, dim=len(rho), validate=validate)

    @classmethod
    def from_dict(cls, doc, validate=True):
        return cls.from_entries(((e['a'], e['phi'], e['rho'])
                                 for e in doc['entries']),
                                dim=doc.get('dim'), validate=validate)

    def replace(self, phi=None, rho=None, validate=False):
        "Same entry layout with new phases and/or probabilities"
        return EnsembleState(self.a,
                             self.phi if phi is None else phi,
                             self.rho if rho is None else rho,
                             dim=self.dim, validate=validate)

    def __len__(self):
        return len(self.a)

    @property
    def entries(self):
        return [(int(a), float(p), float(r))
                for a, p, r in zip(self.a, self.phi, self.rho)]

    def violations(self):
        problems = []
        if not (np.all(np.isfinite(self.phi)) and
                np.all(np.isfinite(self.rho))):
            problems.append("phases and probabilities must be finite")
            return problems
        if np.any(self.a < 0) or np.any(self.a >= self.dim):
            problems.append("observable values must lie in 0..{}".format(
                self.dim - 1))
            return problems
        if np.any(self.rho < 0):
            problems.append("probabilities must be non-negative")
        total = self.rho.sum()
        if abs(total - 1) > NORMALIZATION_TOLERANCE:
            problems.append("probabilities must sum to 1 (within {}), got "
                            "sum {!r}".format(NORMALIZATION_TOLERANCE, total))
        missing = sorted(set(range(self.dim)) - set(self.a.tolist()))
        if missing:
            problems.append("observable values {} have no entry".format(
                missing))
        return problems

    def value_probabilities(self):
        "rho_a, total probability of each observable value"
        return np.bincount(self.a, weights=self.rho, minlength=self.dim)

    def phase_index_within_value(self):
        "Position of each entry among the entries sharing its value"
        index = np.zeros(len(self.a), dtype=int)
        seen = {}
        for i, value in enumerate(self.a):
            index[i] = seen.get(value, 0)
            seen[value] = index[i] + 1
        return index

    def is_equilibrium(self):
        return len(np.unique(self.a)) == len(self.a)

    def to_dict(self):
        return {'dim': self.dim,
                'entries': [{'a': a, 'phi': p, 'rho': r}
                            for a, p, r in self.entries]}

    def __eq__(self, other):
        return (isinstance(other, EnsembleState) and self.dim == other.dim and
                np.array_equal(self.a, other.a) and
                np.array_equal(self.phi, other.phi) and
                np.array_equal(self.rho, other.rho))

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return '{0.__class__.__name__}(dim={0.dim}, entries={1!r})'.format(
            self, self.entries)


class _PairData(object):
    # per-pair constants for a fixed set of active entries
    def __init__(self, a, coupling):
        self.a = a
        self.same = (a[:, None] == a[None, :]).astype(float)
        self.R = coupling.R[np.ix_(a, a)]
        self.beta = coupling.beta[np.ix_(a, a)]
        self.dim = coupling.dim


class EvolutionLaw(object):
    """Right-hand side of one of the non-equilibrium evolution laws

    Parameters
    ----------
    coupling : CouplingMatrix

    kernel : Kernel or str

    model : {'a', 'b'}
        ``'a'`` weighs pairs by rho_j / rho_a; ``'b'`` replaces every
        value total by the kernel weighted density.  The two agree for the
        flat kernel.

    floor : float, optional
        Entries with probability below the floor are frozen: they do not
        move and do not take part in any sum.

    ordered : bool, optional
        Fixed summation order (bitwise reproducible).  ``False`` allows
        BLAS products, which may reorder sums across threads.
    """
    def __init__(self, coupling, kernel, model='a', floor=DEFAULT_FLOOR,
                 ordered=True):
        model = str(model).lower()
        if model not in MODELS:
            raise ConfigurationError("model must be one of {}, got "
                                     "{!r}".format(MODELS, model))
        if floor < 0:
            raise ConfigurationError("probability floor must be >= 0")
        self.coupling = coupling
        self.kernel = parse_kernel(kernel)
        self.model = model
        self.floor = float(floor)
        self.ordered = bool(ordered)
        self._cache_key = None
        self._cache = None

    def __repr__(self):
        return ('{0.__class__.__name__}(model={0.model!r}, '
                'kernel={0.kernel!r}, floor={0.floor!r})'.format(self))

    def scaled(self, alpha):
        "The same law for the Hamiltonian alpha * H"
        return EvolutionLaw(self.coupling.scaled(alpha), self.kernel,
                            self.model, self.floor, self.ordered)

    def _pairs(self, a):
        key = a.tobytes()
        if key != self._cache_key:
            self._cache = _PairData(a, self.coupling)
            self._cache_key = key
        return self._cache

    def _matvec(self, M, v):
        if self.ordered:
            return np.sum(M * v[None, :], axis=1)
        return M.dot(v)

    def active(self, a, rho):
        "Mask of the entries that take part in the dynamics"
        totals = np.bincount(a, weights=rho, minlength=self.coupling.dim)
        return (rho >= self.floor) & (totals[a] > 0)

    def rho_tilde(self, a, phi, rho):
        "Kernel weighted same-value density of every entry"
        pairs = self._pairs(a)
        weight = pairs.same * self.kernel._evaluate(
            wrap_phase(phi[:, None] - phi[None, :]))
        return self._matvec(weight, rho)

    def rates(self, a, phi, rho):
        """(dphi, drho) arrays for the entries ``a`` at (phi, rho)"""
        active = self.active(a, rho)
        if active.all():
            return self._active_rates(a, phi, rho)
        dphi = np.zeros_like(phi)
        drho = np.zeros_like(rho)
        if active.any():
            idx = np.flatnonzero(active)
            try:
                sub_phi, sub_rho = self._active_rates(a[idx], phi[idx],
                                                      rho[idx])
            except SingularConfigurationError as err:
                raise SingularConfigurationError(err.value,
                                                 int(idx[err.entry]))
            dphi[idx] = sub_phi
            drho[idx] = sub_rho
        return dphi, drho

    def _pair_weights(self, a, phi, rho):
        # w_j such that dphi_i = sum_j w_j C_ij / sqrt(rho~_i) and
        # drho_i = 2 w_i sum_j w_j S_ij in both models
        pairs = self._pairs(a)
        diff = phi[:, None] - phi[None, :]
        weight = pairs.same * self.kernel._evaluate(wrap_phase(diff))
        rt = self._matvec(weight, rho)
        bad = np.flatnonzero(rt <= 0)
        if len(bad):
            raise SingularConfigurationError(a[bad[0]], int(bad[0]))
        sq = np.sqrt(rt)
        if self.model == 'a':
            totals = np.bincount(a, weights=rho, minlength=pairs.dim)
            w = rho / totals[a] * sq
        else:
            w = rho / sq
        return pairs, diff + pairs.beta, sq, w

    def _active_rates(self, a, phi, rho):
        pairs, arg, sq, w = self._pair_weights(a, phi, rho)
        dphi = self._matvec(pairs.R * np.cos(arg), w) / sq
        drho = 2 * w * self._matvec(pairs.R * np.sin(arg), w)
        return dphi, drho

    def pair_flows(self, a, phi, rho):
        """Antisymmetric pairwise probability flows J

        ``J[i, j]`` is the j-th summand of drho_i, so ``J.sum(axis=1)``
        is drho.  Rows and columns of frozen entries are zero.
        """
        flows = np.zeros((len(a), len(a)))
        active = self.active(a, rho)
        if not active.any():
            return flows
        idx = np.flatnonzero(active)
        pairs, arg, sq, w = self._pair_weights(a[idx], phi[idx], rho[idx])
        flows[np.ix_(idx, idx)] = (2 * w[:, None] * w[None, :] * pairs.R *
                                   np.sin(arg))
        return flows

    def __call__(self, s):
        return self.derivatives(s)

    def derivatives(self, s):
        """Evaluate the law on an EnsembleState

        Returns
        -------
        Derivatives
        """
        dphi, drho = self.rates(s.a, s.phi, s.rho)
        return Derivatives(dphi, drho)


def rho_tilde(s, k, i):
    """Kernel weighted density seen by entry ``i``

    sum_j rho_j delta(a_i, a_j) F(phi_i - phi_j)
    """
    k = parse_kernel(k)
    same = s.a == s.a[i]
    return float(np.sum(s.rho[same] *
                        np.asarray(k._evaluate(wrap_phase(s.phi[i] -
                                                          s.phi[same])))))


def rhs_model_a(s, m, k, floor=DEFAULT_FLOOR):
    "Derivatives of the state under the kernel weighted law"
    return EvolutionLaw(m, k, 'a', floor=floor).derivatives(s)


def rhs_model_b(s, m, k, floor=DEFAULT_FLOOR):
    "Derivatives under the law with every value total replaced by rho tilde"
    return EvolutionLaw(m, k, 'b', floor=floor).derivatives(s)


def collapse_to_equilibrium(s):
    """One entry per observable value carrying its total probability

    The phase of each value is the probability weighted circular mean of
    its entries' phases (the plain circular mean for an empty value).
    """
    a, phi, rho = [], [], []
    for value in range(s.dim):
        members = s.a == value
        total = float(s.rho[members].sum())
        if members.sum() == 1:
            mean = float(s.phi[members][0])
        elif total > 0:
            mean = weighted_circular_mean(s.phi[members], s.rho[members])
        else:
            mean = weighted_circular_mean(s.phi[members],
                                          np.ones(members.sum()))
        a.append(value)
        phi.append(mean)
        rho.append(total)
    return EnsembleState(a, phi, rho, dim=s.dim, validate=False)
