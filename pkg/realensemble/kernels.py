"""
Phase-overlap kernels F(dphi).

A kernel weighs how much members of the ensemble that share an
observable value but differ in phase contribute to each other's density.
All kernels are even, 2 pi periodic, non-negative and equal to one at
zero phase difference.
"""
from __future__ import (absolute_import, division, print_function,
                        unicode_literals)

import logging
from collections import namedtuple

import numpy as np
from scipy.interpolate import CubicSpline

from .core import ConfigurationError, wrap_phase

logger = logging.getLogger(__name__)

GRID_POINTS = 4096
CURVATURE_STEP = 1e-4
MAX_TABLE_SPACING = 1e-3


Violation = namedtuple('Violation', ['invariant', 'dphi', 'detail'])


class KernelValidationError(ConfigurationError):
    def __init__(self, violations):
        self.violations = list(violations)
        msg = "; ".join("{0.invariant} at dphi={0.dphi!r}: {0.detail}"
                        .format(v) for v in self.violations[:5])
        if len(self.violations) > 5:
            msg += " (and {} more)".format(len(self.violations) - 5)
        super(KernelValidationError, self).__init__(msg)


class CurvatureError(ConfigurationError):
    pass


class Kernel(object):
    """
    Base-class for kernels.

    Sub-classes implement ``_evaluate`` on phases already reduced to
    (-pi, pi] and ``curvature`` returning -F''(0)/2.
    """
    variant = None
    continuous = True

    def __call__(self, dphi):
        return eval_kernel(self, dphi)

    def _evaluate(self, dphi):
        raise NotImplementedError

    def _evaluate_raw(self, dphi):
        # un-reduced evaluation, only differs for tabulated kernels
        return self._evaluate(wrap_phase(dphi))

    def curvature(self):
        raise NotImplementedError

    @property
    def spec(self):
        "Config string this kernel parses from"
        return self.variant

    def __repr__(self):
        return '{0.__class__.__name__}()'.format(self)

    def __eq__(self, other):
        return type(self) is type(other) and self.spec == other.spec

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((type(self).__name__, self.spec))


class FlatKernel(Kernel):
    "F = 1, densities under the square roots ignore phase"
    variant = 'flat'

    def _evaluate(self, dphi):
        return np.ones_like(dphi)

    def curvature(self):
        return 0.0


class CosineKernel(Kernel):
    "F = cos^2(dphi / 2)"
    variant = 'cosine'

    def _evaluate(self, dphi):
        return np.cos(0.5 * dphi) ** 2

    def curvature(self):
        return 0.25


class SpikedKernel(Kernel):
    """
    F_c = cos^2(c dphi / 2) where cos(dphi) >= cos(pi / c), else 0

    Parameters
    ----------
    c : float
        Sharpness, positive.  ``c = 1`` is the cosine kernel.  For
        ``c >= 1`` the support is |dphi| <= pi / c; for ``1/2 < c < 1``
        it shrinks again to |dphi| <= 2 pi - pi / c.  At ``c = 1/2``
        (and every ``1 / (2 k)``) the support collapses to coincident
        phases: the kernel is 1 at dphi = 0 and 0 elsewhere.
    """
    variant = 'spiked'

    def __init__(self, c):
        c = float(c)
        if not (np.isfinite(c) and c > 0):
            raise ConfigurationError("spiked kernel needs a positive, "
                                     "finite c, got {!r}".format(c))
        self.c = c
        # half width of the step, in [0, pi]
        self._support = float(np.arccos(np.clip(np.cos(np.pi / c), -1, 1)))
        self.continuous = self._support > 0
        if not self.continuous:
            logger.warning("spiked kernel c=%r only couples coincident "
                           "phases", c)

    def _evaluate(self, dphi):
        value = np.cos(0.5 * self.c * dphi) ** 2
        return np.where(np.abs(dphi) <= self._support, value, 0.0)

    def curvature(self):
        return 0.25 * self.c ** 2

    @property
    def spec(self):
        return 'spiked:{!r}'.format(self.c)

    def __repr__(self):
        return '{0.__class__.__name__}(c={0.c!r})'.format(self)


class TabulatedKernel(Kernel):
    """
    Kernel given on a grid of (dphi, value) pairs, linearly interpolated.

    Parameters
    ----------
    dphi : array_like
        Strictly increasing grid.  If every node is >= 0 the table is
        mirrored to negative phase differences, otherwise it is used
        as given and must cover [-pi, pi].

    values : array_like
        Kernel values at the nodes

    source : str, optional
        Where the table came from, used in the config string
    """
    variant = 'table'

    def __init__(self, dphi, values, source=None):
        dphi = np.asarray(dphi, dtype=float)
        values = np.asarray(values, dtype=float)
        if dphi.ndim != 1 or dphi.shape != values.shape or len(dphi) < 2:
            raise ConfigurationError("kernel table needs two equal length "
                                     "columns with at least two rows")
        if np.any(np.diff(dphi) <= 0):
            raise ConfigurationError("kernel table phases must be strictly "
                                     "increasing")
        if dphi[0] >= 0:
            if dphi[0] == 0:
                mirror_x, mirror_v = -dphi[:0:-1], values[:0:-1]
            else:
                mirror_x, mirror_v = -dphi[::-1], values[::-1]
            dphi = np.concatenate([mirror_x, dphi])
            values = np.concatenate([mirror_v, values])
        self.dphi = dphi
        self.values = values
        self.source = source

    def _evaluate_raw(self, dphi):
        return np.interp(dphi, self.dphi, self.values)

    def _evaluate(self, dphi):
        return self._evaluate_raw(dphi)

    def node_spacing_near_zero(self):
        idx = np.searchsorted(self.dphi, 0.0)
        lo = max(idx - 1, 0)
        hi = min(idx + 1, len(self.dphi) - 1)
        return float(np.max(np.diff(self.dphi[lo:hi + 1])))

    def curvature(self):
        spacing = self.node_spacing_near_zero()
        if spacing > MAX_TABLE_SPACING:
            raise CurvatureError(
                "kernel table too coarse near 0 (spacing {!r} > {!r}) to "
                "estimate F''(0)".format(spacing, MAX_TABLE_SPACING))
        spline = CubicSpline(self.dphi, self.values)
        h = CURVATURE_STEP
        second = (spline(h) - 2 * spline(0.0) + spline(-h)) / h ** 2
        return float(-0.5 * second)

    @property
    def spec(self):
        return 'table:{}'.format(self.source)

    def __repr__(self):
        return '{0.__class__.__name__}(source={0.source!r}, n={1})'.format(
            self, len(self.dphi))


def eval_kernel(k, dphi):
    """Evaluate the kernel at phase differences ``dphi``

    Parameters
    ----------
    k : Kernel

    dphi : float or array_like
        Radians, reduced modulo 2 pi to (-pi, pi] internally.

    Returns
    -------
    F : float or ndarray
    """
    reduced = wrap_phase(dphi)
    out = k._evaluate(np.asarray(reduced, dtype=float))
    if np.ndim(out) == 0:
        return float(out)
    return out


def kernel_curvature(k):
    """Curvature parameters governing near-equilibrium dynamics

    Returns
    -------
    dphiF_inv_sq : float
        -F''(0) / 2

    lam : float
        dphiF_inv_sq - 1; positive values give power-law relaxation,
        negative ones exponential relaxation.
    """
    inv_sq = float(k.curvature())
    return inv_sq, inv_sq - 1.0


def validate_kernel(k, n=GRID_POINTS):
    """Check the kernel invariants on an ``n`` point grid over [-pi, pi]

    Returns
    -------
    violations : list of Violation
        Empty when F(0) = 1, F >= 0, F is even, 2 pi periodic and
        continuous at zero phase difference.  Kernels flagged
        ``continuous = False`` skip the continuity check.
    """
    violations = []
    grid = np.linspace(-np.pi, np.pi, n + 1)
    raw = np.asarray(k._evaluate_raw(grid), dtype=float)

    f0 = float(np.asarray(k._evaluate_raw(np.array([0.0])))[0])
    if abs(f0 - 1) > 1e-12:
        violations.append(Violation('normalization', 0.0,
                                    'F(0) = {!r} != 1'.format(f0)))

    bad = np.flatnonzero(~np.isfinite(raw) | (raw < 0))
    for i in bad:
        violations.append(Violation('non-negativity', float(grid[i]),
                                    'F = {!r}'.format(raw[i])))

    asym = np.abs(raw - raw[::-1])
    for i in np.flatnonzero(asym > 1e-12):
        if grid[i] > 0:
            violations.append(Violation(
                'evenness', float(grid[i]),
                'F(dphi) - F(-dphi) = {!r}'.format(raw[i] - raw[-1 - i])))

    if abs(raw[0] - raw[-1]) > 1e-12:
        violations.append(Violation(
            'periodicity', float(np.pi),
            'F(-pi) = {!r} != F(pi) = {!r}'.format(raw[0], raw[-1])))

    # a jump at zero would make the dynamics discontinuous at equilibrium
    eps = np.array([-1e-6, 1e-6])
    near = np.asarray(k._evaluate_raw(eps), dtype=float)
    if k.continuous and np.any(np.abs(near - f0) > 1e-3):
        violations.append(Violation(
            'continuity', 0.0,
            'F jumps from {!r} to {!r} next to zero'.format(f0, near.tolist())))

    return violations


def check_kernel(k):
    "Raise KernelValidationError unless ``k`` passes validate_kernel"
    violations = validate_kernel(k)
    if violations:
        raise KernelValidationError(violations)
    return k


def load_table(path):
    """Read a two-column (dphi, value) CSV kernel table"""
    data = np.loadtxt(path, delimiter=',', ndmin=2, comments='#')
    if data.shape[1] != 2:
        raise ConfigurationError("kernel table {!r} must have exactly two "
                                 "columns, found {}".format(path,
                                                            data.shape[1]))
    logger.debug("Loaded kernel table %s with %d rows", path, len(data))
    return TabulatedKernel(data[:, 0], data[:, 1], source=path)


def parse_kernel(spec):
    """Build a kernel from its config string

    ``flat`` | ``cosine`` | ``spiked:<c>`` | ``table:<path>``.
    ``spiked:0`` is the flat kernel and ``spiked:1`` the cosine kernel's
    pointwise twin.

    Tabulated kernels are validated before they are returned.
    """
    if isinstance(spec, Kernel):
        return spec
    text = str(spec).strip()
    name, _, arg = text.partition(':')
    name = name.lower()
    if name == 'flat' and not arg:
        return FlatKernel()
    if name == 'cosine' and not arg:
        return CosineKernel()
    if name == 'spiked':
        try:
            c = float(arg)
        except ValueError:
            raise ConfigurationError("bad spiked kernel spec {!r}".format(
                text))
        if c == 0:
            return FlatKernel()
        return SpikedKernel(c)
    if name == 'table' and arg:
        return check_kernel(load_table(arg))
    raise ConfigurationError(
        "unknown kernel {!r}; expected 'flat', 'cosine', 'spiked:<c>' or "
        "'table:<path>'".format(text))


def kernel_for_sharpness(c):
    "F_c of the phase-space scans, with c = 0 meaning the flat kernel"
    if c == 0:
        return FlatKernel()
    return SpikedKernel(c)
