"""
Two-level Hamiltonians in the (R, beta) coupling form and the exact
quantum mechanical propagation used as the reference everything else is
compared against.

Conventions: hbar = 1, H[a][b] = R[a][b] exp(i beta[a][b]) and the state
amplitudes are sqrt(rho_a) exp(-i phi_a).
"""
from __future__ import (absolute_import, division, print_function,
                        unicode_literals)

import logging
from collections import namedtuple

import numpy as np
from scipy.linalg import expm

from .core import ConfigurationError, NormalizationError, wrap_phase

logger = logging.getLogger(__name__)

_NORM_TOL = 1e-9


class PauliCoefficients(namedtuple('PauliCoefficients',
                                   ['c_t', 'c_x', 'c_y', 'c_z'])):
    """H = c_t I + c_x sigma_x + c_y sigma_y + c_z sigma_z"""
    __slots__ = ()

    def __new__(cls, c_t=0.0, c_x=0.0, c_y=0.0, c_z=0.0):
        vals = [float(v) for v in (c_t, c_x, c_y, c_z)]
        if not all(np.isfinite(vals)):
            raise ConfigurationError("Pauli coefficients must be finite, "
                                     "got {!r}".format(vals))
        return super(PauliCoefficients, cls).__new__(cls, *vals)

    def matrix(self):
        "The 2x2 Hamiltonian matrix these coefficients describe"
        return np.array([[self.c_t + self.c_z, self.c_x - 1j * self.c_y],
                         [self.c_x + 1j * self.c_y, self.c_t - self.c_z]])


class CouplingMatrix(object):
    '''Magnitudes R and phases beta of the Hamiltonian in the realized basis

    Parameters
    ----------
    R : array_like
        dim x dim, symmetric, non-negative

    beta : array_like
        dim x dim, antisymmetric modulo 2 pi.  Stored wrapped to (-pi, pi].

    validate : bool, optional
        Check the invariants on construction.  Default True.
    '''
    def __init__(self, R, beta, validate=True):
        R = np.array(R, dtype=float)
        beta = wrap_phase(np.array(beta, dtype=float))
        if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape != beta.shape:
            raise ConfigurationError(
                "R and beta must be square matrices of equal shape, "
                "got {} and {}".format(R.shape, beta.shape))
        self.R = R
        self.beta = beta
        self.R.setflags(write=False)
        self.beta.setflags(write=False)
        if validate:
            problems = self.violations()
            if problems:
                raise ConfigurationError("Invalid coupling matrix: " +
                                         "; ".join(problems))

    @property
    def dim(self):
        return self.R.shape[0]

    def violations(self):
        "List the broken invariants, empty if the coupling is valid"
        problems = []
        if not (np.all(np.isfinite(self.R)) and
                np.all(np.isfinite(self.beta))):
            problems.append("entries must be finite")
            return problems
        if np.any(self.R < 0):
            problems.append("R must be non-negative")
        if not np.allclose(self.R, self.R.T, rtol=0, atol=1e-12):
            problems.append("R must be symmetric")
        # antisymmetry is modulo 2 pi: compare on the circle
        mismatch = np.abs(wrap_phase(self.beta + self.beta.T))
        off = ~np.eye(self.dim, dtype=bool)
        # a vanishing magnitude makes its phase unobservable
        off &= self.R > 0
        if np.any(mismatch[off] > 1e-12):
            problems.append("beta must be antisymmetric")
        return problems

    def scaled(self, alpha):
        """Coupling of alpha * H

        Only positive ``alpha`` keeps the (R >= 0) form, which is all
        the energy-scale relabeling needs.
        """
        if not alpha > 0:
            raise ConfigurationError("scale factor must be positive")
        return CouplingMatrix(self.R * alpha, self.beta, validate=False)

    def reversed(self):
        "Coupling with beta -> -beta (the time-reversal partner)"
        return CouplingMatrix(self.R, -self.beta, validate=False)

    def is_diagonal(self):
        return not np.any(self.R[~np.eye(self.dim, dtype=bool)])

    def to_dict(self):
        return {'R': self.R.tolist(), 'beta': self.beta.tolist()}

    def __repr__(self):
        return '{0.__class__.__name__}(R={1!r}, beta={2!r})'.format(
            self, self.R.tolist(), self.beta.tolist())


def _arg(z):
    "arg(z) in (-pi, pi] with arg(0) = 0"
    if z == 0:
        return 0.0
    angle = float(np.angle(z))
    if angle <= -np.pi:
        angle = np.pi
    return angle


def pauli_to_coupling(c):
    """Convert Pauli coefficients of a two-level Hamiltonian to (R, beta)

    Parameters
    ----------
    c : PauliCoefficients

    Returns
    -------
    coupling : CouplingMatrix
        dim = 2
    """
    c = PauliCoefficients(*c)
    r12 = np.hypot(c.c_x, c.c_y)
    R = [[abs(c.c_t + c.c_z), r12],
         [r12, abs(c.c_t - c.c_z)]]
    b12 = _arg(complex(c.c_x, -c.c_y))
    beta = [[_arg(complex(c.c_t + c.c_z, 0.0)), b12],
            [-b12, _arg(complex(c.c_t - c.c_z, 0.0))]]
    return CouplingMatrix(R, beta)


def coupling_to_hamiltonian(m):
    "H[a][b] = R[a][b] exp(i beta[a][b])"
    return m.R * np.exp(1j * m.beta)


def _check_normalized(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise NormalizationError("probabilities must be non-negative, "
                                 "got {!r}".format(rho.tolist()))
    total = rho.sum()
    if abs(total - 1) > _NORM_TOL:
        raise NormalizationError("probabilities must sum to 1 (within {}), "
                                 "got sum {!r}".format(_NORM_TOL, total))
    return rho


def _two_level_propagator(H, t):
    # H = h0 I + h . sigma, U = exp(-i h0 t)[cos(|h| t) - i sin(|h| t) n.sigma]
    h0 = 0.5 * (H[0, 0] + H[1, 1]).real
    hz = 0.5 * (H[0, 0] - H[1, 1]).real
    hx = H[1, 0].real
    hy = H[1, 0].imag
    norm = np.sqrt(hx * hx + hy * hy + hz * hz)
    phase = np.exp(-1j * h0 * t)
    if norm == 0:
        return phase * np.eye(2, dtype=complex)
    c = np.cos(norm * t)
    s = np.sin(norm * t) / norm
    return phase * np.array([[c - 1j * s * hz, -1j * s * (hx - 1j * hy)],
                             [-1j * s * (hx + 1j * hy), c + 1j * s * hz]])


def propagator(m, t):
    """exp(-i H t) for the Hamiltonian described by ``m``

    Closed form for two levels, dense matrix exponential otherwise.
    """
    H = coupling_to_hamiltonian(m)
    if m.dim == 2:
        return _two_level_propagator(H, t)
    return expm(-1j * H * t)


def qm_reference_evolution(m, rho0, phi0, t):
    """Evolve the equilibrium state with the Schrodinger equation

    Parameters
    ----------
    m : CouplingMatrix

    rho0 : array_like
        Per-value probabilities, must sum to one

    phi0 : array_like
        Per-value phases

    t : float
        Elapsed time in units of the inverse Hamiltonian scale

    Returns
    -------
    rho : ndarray
        |<a|exp(-iHt)|Psi>|^2

    phi : ndarray
        Phases of the amplitudes, amplitude = sqrt(rho) exp(-i phi),
        wrapped to (-pi, pi].  Zero where the amplitude vanishes.
    """
    rho0 = _check_normalized(rho0)
    phi0 = np.asarray(phi0, dtype=float)
    if rho0.shape != (m.dim,) or phi0.shape != (m.dim,):
        raise ConfigurationError("need one probability and one phase per "
                                 "observable value")
    psi0 = np.sqrt(rho0) * np.exp(-1j * phi0)
    psi = propagator(m, t).dot(psi0)
    rho = np.abs(psi) ** 2
    phi = np.where(rho > 0, wrap_phase(-np.angle(psi)), 0.0)
    return rho, phi
