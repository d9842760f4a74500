from __future__ import (absolute_import, division, print_function,
                        unicode_literals)

import numpy as np


class RealEnsembleError(Exception):
    pass


class ConfigurationError(RealEnsembleError, ValueError):
    """Raised for anything the user supplied that can not be used.

    Maps to exit code 1 in the command line interface.
    """
    pass


class IntegrationError(RealEnsembleError, RuntimeError):
    """Raised when a numerically valid input fails during evolution.

    Maps to exit code 2 in the command line interface.
    """
    pass


class NormalizationError(ConfigurationError):
    pass


class DomainError(ConfigurationError):
    pass


def wrap_phase(phi):
    """Reduce phases to the half-open interval (-pi, pi]

    Parameters
    ----------
    phi : float or array_like
        Phases in radians, unwrapped.

    Returns
    -------
    wrapped : float or ndarray
        Same shape as the input.
    """
    phi = np.asarray(phi, dtype=float)
    # in-range values pass through unchanged
    inside = (phi > -np.pi) & (phi <= np.pi)
    out = np.where(inside, phi, np.pi - np.mod(np.pi - phi, 2 * np.pi))
    if out.ndim == 0:
        return float(out)
    return out


def weighted_circular_mean(phi, weights):
    """Probability-weighted mean of a set of phases on the circle

    Offsets are measured as wrapped distances from the direction of the
    weighted resultant and then averaged arithmetically, so for spreads
    well below pi this is the plain weighted mean while remaining
    well defined (and invariant under a global phase shift) for wide
    spreads.  The result stays on the sheet of the heaviest member, so
    unwrapped phases keep their secular drift.

    Parameters
    ----------
    phi : array_like
        Phases in radians
    weights : array_like
        Non-negative weights, need not be normalized

    Returns
    -------
    mean : float
    """
    phi = np.asarray(phi, dtype=float)
    weights = np.asarray(weights, dtype=float)
    total = weights.sum()
    if not total > 0:
        raise ValueError("weights must have a positive sum")
    anchor = phi[np.argmax(weights)]
    offsets = wrap_phase(phi - anchor)
    resultant = np.sum(weights * np.exp(1j * offsets))
    ref = anchor
    if abs(resultant) > 1e-12 * total:
        ref = anchor + np.angle(resultant)
    mean_offset = np.sum(weights * wrap_phase(phi - ref)) / total
    return float(ref + mean_offset)


def wrapped_deviation(phi, mean):
    "Wrapped distance of each phase from ``mean``, in (-pi, pi]"
    return wrap_phase(np.asarray(phi, dtype=float) - mean)
