"""
Analytic near-equilibrium theory for a diagonal Hamiltonian.

For a diagonal Hamiltonian every observable value evolves on its own, so
the ensemble of one value reduces to phases ``phis`` with conditional
weights ``weights``.  Times are in units of the inverse diagonal
Hamiltonian element.  The quantities here are used as an independent
oracle for the full simulations:

* the exact and the Taylor-expanded reduced dynamics,
* the rescaled steady state reached for lambda > 0, a scaled Beta
  distribution between the two fixed points of the rescaled flow,
* the static solution for -1 < lambda < 0,
* the hierarchy of central phase moments and the mean phase drift.
"""
from __future__ import (absolute_import, division, print_function,
                        unicode_literals)

import logging
from collections import namedtuple

import numpy as np
from scipy import stats
from scipy.integrate import quad, solve_ivp
from scipy.special import binom

from .core import ConfigurationError, DomainError, IntegrationError
from .kernels import parse_kernel

logger = logging.getLogger(__name__)

QUAD_TOLERANCE = 1e-10


class NoSteadyStateError(DomainError):
    pass


class SingularParameterError(DomainError):
    pass


class MissingMomentError(ConfigurationError):
    def __init__(self, order):
        self.order = order
        super(MissingMomentError, self).__init__(
            "moment of order {} is required but was not supplied".format(
                order))


class ReducedSingularError(IntegrationError):
    pass


class ReducedState(object):
    """Phases and conditional weights of a single observable value

    Parameters
    ----------
    phis : array_like
        Phases in radians

    weights : array_like
        Conditional probabilities, normalized to 1e-12

    lam : float, optional
        Kernel curvature parameter, needed by the Taylor dynamics
    """
    def __init__(self, phis, weights, lam=None):
        self.phis = np.array(phis, dtype=float).ravel()
        self.weights = np.array(weights, dtype=float).ravel()
        self.lam = lam
        if self.phis.shape != self.weights.shape or not len(self.phis):
            raise ConfigurationError("need one weight per phase")
        if np.any(self.weights < 0):
            raise ConfigurationError("weights must be non-negative")
        if abs(self.weights.sum() - 1) > 1e-12:
            raise ConfigurationError("weights must sum to 1, got {!r}".format(
                self.weights.sum()))

    @classmethod
    def from_ensemble(cls, s, value, lam=None):
        "The subsystem of observable ``value`` of an EnsembleState"
        members = s.a == value
        rho = s.rho[members]
        return cls(s.phi[members], rho / rho.sum(), lam=lam)

    @property
    def mean(self):
        "<phi>, the weighted (unwrapped) mean phase"
        return float(np.dot(self.weights, self.phis))

    @property
    def centered(self):
        return self.phis - self.mean

    def moment(self, m):
        "<(phi - <phi>)**m>"
        return float(np.dot(self.weights, self.centered ** m))

    def tilde(self, t):
        "Rescaled phases lambda t (phi - <phi>)"
        return self.lam * t * self.centered


def reduced_rhs_exact(s, k):
    """Exact reduced dynamics of one value with R_aa = 1

    Returns
    -------
    dphis, dweights : ndarray
    """
    k = parse_kernel(k)
    diff = s.phis[:, None] - s.phis[None, :]
    overlap = np.sum(s.weights[None, :] * k(diff), axis=1)
    if np.any(overlap <= 0):
        raise ReducedSingularError("kernel weighted density vanished for "
                                   "phase {}".format(int(np.argmin(overlap))))
    root = np.sqrt(overlap)
    dphis = np.sum(s.weights[None, :] * np.cos(diff) * root[None, :],
                   axis=1) / root
    dweights = 2 * s.weights * root * np.sum(
        s.weights[None, :] * np.sin(diff) * root[None, :], axis=1)
    return dphis, dweights


def reduced_rhs_taylor(s):
    """Leading-order dynamics of a tightly clustered value

    Returns
    -------
    dphi_rel : ndarray
        d(phi_i - <phi>)/dt.  Pairwise differences give
        (lambda / 2)[(phi_i - <phi>)**2 - (phi_m - <phi>)**2].

    dweights : ndarray
        2 w_i (phi_i - <phi>)
    """
    if s.lam is None:
        raise ConfigurationError("the Taylor dynamics need lambda")
    x = s.centered
    var = float(np.dot(s.weights, x * x))
    dphi_rel = 0.5 * s.lam * x * x - 0.5 * (s.lam + 4) * var
    return dphi_rel, 2 * s.weights * x


def tilde_flow(phi_tilde, sigma):
    "d(phi~)/d(ln t) of the rescaled phases"
    phi_tilde = np.asarray(phi_tilde, dtype=float)
    return phi_tilde + 0.5 * phi_tilde ** 2 - 0.5 * (sigma ** 2 - 1)


def tilde_weight_rate(phi_tilde, lam):
    "d(ln w)/d(ln t) of the rescaled phases"
    return 2.0 / lam * np.asarray(phi_tilde, dtype=float)


def fixed_points(sigma):
    """Fixed points of the rescaled flow

    Returns
    -------
    phi_plus, phi_minus : float
        ``phi_plus`` is unstable, ``phi_minus`` stable.
    """
    if not sigma > 0:
        raise DomainError("sigma must be positive, got {!r}".format(sigma))
    return -1.0 + sigma, -1.0 - sigma


class SteadyStateParams(namedtuple('SteadyStateParams',
                                   ['lam', 'sigma', 'alpha_plus',
                                    'alpha_minus', 'phi_plus', 'phi_minus'])):
    """Rescaled steady state for lambda > 0

    Build with ``SteadyStateParams.from_lambda_sigma``.
    """
    __slots__ = ()

    @classmethod
    def from_lambda_sigma(cls, lam, sigma):
        lam = float(lam)
        sigma = float(sigma)
        if not lam > 0:
            raise NoSteadyStateError(
                "no normalizable steady state for lambda = {!r} <= 0".format(
                    lam))
        if not sigma > 1:
            raise DomainError("sigma must exceed 1 when lambda > 0, got "
                              "{!r}".format(sigma))
        alpha_plus = -1 + 2 / lam - 2 / (lam * sigma)
        alpha_minus = -1 + 2 / lam + 2 / (lam * sigma)
        phi_plus, phi_minus = fixed_points(sigma)
        return cls(lam, sigma, alpha_plus, alpha_minus, phi_plus, phi_minus)

    def distribution(self):
        "Normalized steady state as a frozen scipy distribution"
        return stats.beta(self.alpha_minus + 1, self.alpha_plus + 1,
                          loc=self.phi_minus, scale=2 * self.sigma)


def steady_state_density(p, phi_tilde):
    """Unnormalized steady-state weight at ``phi_tilde``

    (phi_plus - phi~)**alpha_plus (phi~ - phi_minus)**alpha_minus
    """
    if not p.lam > 0:
        raise NoSteadyStateError("no steady state for lambda <= 0")
    x = np.asarray(phi_tilde, dtype=float)
    if np.any(x <= p.phi_minus) or np.any(x >= p.phi_plus):
        raise DomainError("phi~ must lie in ({!r}, {!r})".format(
            p.phi_minus, p.phi_plus))
    out = (p.phi_plus - x) ** p.alpha_plus * (x - p.phi_minus) ** p.alpha_minus
    if out.ndim == 0:
        return float(out)
    return out


def _weighted_integral(p, f):
    # endpoint singularities are carried by the algebraic weight
    value, abserr = quad(f, p.phi_minus, p.phi_plus, weight='alg',
                         wvar=(p.alpha_minus, p.alpha_plus),
                         epsabs=QUAD_TOLERANCE, epsrel=QUAD_TOLERANCE,
                         limit=200)
    logger.debug("steady-state quadrature %r (error estimate %g)", value,
                 abserr)
    return value


def steady_state_normalization(p):
    "Integral of steady_state_density over (phi_minus, phi_plus)"
    return _weighted_integral(p, lambda x: 1.0)


def steady_state_moment(p, order):
    "<phi~**order> under the normalized steady state"
    return (_weighted_integral(p, lambda x: x ** order) /
            steady_state_normalization(p))


def sample_steady_state(p, n, rng):
    """Draw ``n`` rescaled phases from the normalized steady state

    Parameters
    ----------
    p : SteadyStateParams

    n : int

    rng : numpy.random.Generator
        Explicit random source
    """
    u = rng.beta(p.alpha_minus + 1, p.alpha_plus + 1, size=n)
    return p.phi_minus + 2 * p.sigma * u


def transport_steady_flow(p, phi_tilde, tau):
    """Carry rescaled phases along the flow for a rescaled time ``tau``

    Along a characteristic ln((phi_plus - phi~) / (phi~ - phi_minus))
    grows at rate sigma and ln w changes by the integral of
    tilde_weight_rate, both in closed form.

    Returns
    -------
    phi_tilde : ndarray
        Transported phases

    log_gain : ndarray
        Change of ln w of each phase
    """
    u = (np.asarray(phi_tilde, dtype=float) - p.phi_minus) / (2 * p.sigma)
    if np.any(u <= 0) or np.any(u >= 1):
        raise DomainError("phases must lie strictly inside ({!r}, "
                          "{!r})".format(p.phi_minus, p.phi_plus))
    r0 = np.log1p(-u) - np.log(u)
    r1 = r0 + p.sigma * tau
    # ln u and ln(1 - u) along the characteristic
    log_u0, log_v0 = -np.logaddexp(0, r0), r0 - np.logaddexp(0, r0)
    log_u1, log_v1 = -np.logaddexp(0, r1), r1 - np.logaddexp(0, r1)
    log_gain = 2 / (p.lam * p.sigma) * (p.phi_plus * (log_v1 - log_v0) -
                                        p.phi_minus * (log_u1 - log_u0))
    return p.phi_minus + 2 * p.sigma * np.exp(log_u1), log_gain


def weighted_ks_to_cdf(x, weights, cdf, total=None):
    """Sup distance between the weighted empirical CDF of ``x`` and ``cdf``

    The cumulative weight is divided by ``total`` (the sum of
    ``weights`` when omitted), so a sample whose mass drifted away from
    ``total`` is far from any CDF.
    """
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind='mergesort')
    cum = np.cumsum(np.asarray(weights, dtype=float)[order])
    cum /= cum[-1] if total is None else total
    below = np.concatenate([[0.0], cum[:-1]])
    ref = cdf(x[order])
    return float(max(np.max(np.abs(cum - ref)), np.max(np.abs(below - ref))))


def stationarity_ks(p, n, rng, tau=1.0, initial=None):
    """KS distance of a transported sample from the density it was drawn from

    ``n`` phases of unit total weight are drawn from ``initial`` (the
    steady state by default) and carried along the rescaled flow for
    ``tau`` with their weights.  The transported measure is compared,
    without renormalizing, with ``initial``'s CDF: shape changes and
    drifts of the total weight both count.

    Parameters
    ----------
    p : SteadyStateParams

    n : int

    rng : numpy.random.Generator

    tau : float, optional
        Rescaled transport time, in units of ln t

    initial : frozen scipy distribution, optional
        Supported on (phi_minus, phi_plus)
    """
    if not tau > 0:
        raise DomainError("tau must be positive, got {!r}".format(tau))
    if initial is None:
        initial = p.distribution()
    x = initial.rvs(size=n, random_state=rng)
    # endpoint draws are fixed points of the flow
    x = x[(x > p.phi_minus) & (x < p.phi_plus)]
    moved, log_gain = transport_steady_flow(p, x, tau)
    weights = np.exp(log_gain) / n
    return weighted_ks_to_cdf(moved, weights, initial.cdf, total=1.0)


def variance_prediction(lam, sigma):
    "<phi~**2> = (sigma**2 - 1) / (1 + 4 / lambda)"
    if lam == -4:
        raise SingularParameterError("variance prediction is singular at "
                                     "lambda = -4")
    if lam == 0:
        return 0.0
    return (sigma ** 2 - 1) / (1 + 4 / lam)


def sigma_from_variance(variance, lam):
    """Invert variance_prediction for sigma (the free constant is fit)"""
    if lam == -4 or lam == 0:
        raise SingularParameterError("sigma is not determined at lambda = "
                                     "{!r}".format(lam))
    sq = 1 + variance * (1 + 4 / lam)
    if sq < 0:
        raise DomainError("variance {!r} is inconsistent with lambda = "
                          "{!r}".format(variance, lam))
    return float(np.sqrt(sq))


def static_density_exponent(lam):
    "Exponent of the static |dphi|**(4/lambda - 2) solution, -1 < lambda < 0"
    if not -1 < lam < 0:
        raise DomainError("static solution needs -1 < lambda < 0, got "
                          "{!r}".format(lam))
    return 4.0 / lam - 2


def cutoff_variance(lam, dphi_min):
    "<dphi**2> of the static solution cut off at ``dphi_min``"
    static_density_exponent(lam)
    return (lam - 4) / (-lam - 4) * dphi_min ** 2


def moment_hierarchy_rhs(moments, lam, m):
    """d<dphi**m>/dt from the moment hierarchy

    Parameters
    ----------
    moments : mapping
        order -> central moment.  Order 0 defaults to 1.

    lam : float

    m : int
        Positive order

    Returns
    -------
    float
    """
    if m < 1:
        raise ConfigurationError("moment order must be positive")

    def get(order):
        if order == 0 and 0 not in moments:
            return 1.0
        try:
            return moments[order]
        except KeyError:
            raise MissingMomentError(order)

    return ((2 + m * lam / 2) * get(m + 1) -
            m * (lam + 4) / 2 * get(2) * get(m - 1))


def cumulant_closure(moments, order):
    """Central moment of ``order + 1`` with every cumulant above ``order``
    set to zero

    ``moments`` maps 2..order to central moments; order 1 is zero.
    """
    mu = {0: 1.0, 1: 0.0}
    mu.update(moments)
    kappa = {1: 0.0}
    for n in range(2, order + 1):
        kappa[n] = mu[n] - sum(binom(n - 1, k - 1) * kappa[k] * mu[n - k]
                               for k in range(1, n))
    n = order + 1
    return sum(binom(n - 1, k - 1) * kappa[k] * mu[n - k]
               for k in range(1, order + 1))


def evolve_moments(moments0, lam, t_end, order=4, t_eval=None, rtol=1e-10,
                   atol=1e-20):
    """Integrate central moments 2..order under the hierarchy

    The next order is closed with a cumulant (Gaussian-type) closure.

    Returns
    -------
    times : ndarray

    moments : dict
        order -> ndarray of the moment at ``times``
    """
    if order < 2:
        raise ConfigurationError("need at least order 2")
    orders = list(range(2, order + 1))
    y0 = [moments0.get(m, 0.0) for m in orders]

    def rhs(t, y):
        mu = dict(zip(orders, y))
        mu[1] = 0.0
        mu[order + 1] = cumulant_closure(dict(zip(orders, y)), order)
        return [moment_hierarchy_rhs(mu, lam, m) for m in orders]

    sol = solve_ivp(rhs, (0.0, t_end), y0, method='RK45', t_eval=t_eval,
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationError("moment integration failed: " + sol.message)
    return sol.t, {m: sol.y[i] for i, m in enumerate(orders)}


def mean_phase_drift(var_dphi):
    "d<phi>/dt in units of R_aa: 1 + <dphi**2>"
    if var_dphi < 0:
        raise DomainError("variance must be non-negative")
    return 1.0 + var_dphi


def predicted_decay_class(lam):
    "'PowerLaw' for lambda > 0, 'Exponential' for -1 < lambda < 0"
    if lam > 0:
        return 'PowerLaw'
    if -1 < lam < 0:
        return 'Exponential'
    return None


def oracle_report(lam, tilde_variance=None):
    """Summary of the analytic predictions for a kernel

    Parameters
    ----------
    lam : float

    tilde_variance : float, optional
        Measured <phi~**2>, used to fit sigma

    Returns
    -------
    dict
        lambda, sigma_fit, alpha_plus, alpha_minus, predicted_variance,
        predicted_decay_class
    """
    report = {'lambda': lam, 'sigma_fit': None, 'alpha_plus': None,
              'alpha_minus': None, 'predicted_variance': None,
              'predicted_decay_class': predicted_decay_class(lam)}
    if tilde_variance is not None and lam > 0:
        sigma = sigma_from_variance(tilde_variance, lam)
        report['sigma_fit'] = sigma
        report['predicted_variance'] = variance_prediction(lam, sigma)
        if sigma > 1:
            p = SteadyStateParams.from_lambda_sigma(lam, sigma)
            report['alpha_plus'] = p.alpha_plus
            report['alpha_minus'] = p.alpha_minus
        else:
            logger.info("fitted sigma %r <= 1, no steady state", sigma)
    return report
