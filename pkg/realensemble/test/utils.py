from __future__ import (unicode_literals, print_function, division,
                        absolute_import)
import numpy as np

from realensemble.ensemble import EnsembleState
from realensemble.hamiltonian import (CouplingMatrix, PauliCoefficients,
                                      pauli_to_coupling)
from realensemble.kernels import eval_kernel, parse_kernel


TABLE1_RHO = [[0.16, 0.08, 0.06], [0.23, 0.3, 0.17]]
EVEN_RHO = [[0.2, 0.1, 0.2], [0.2, 0.1, 0.2]]


def template_phases(dphi0):
    "{0, d, 2d}, {pi/2 + d, pi/2, pi/2 + d/2}"
    return [[0.0, dphi0, 2 * dphi0],
            [np.pi / 2 + dphi0, np.pi / 2, np.pi / 2 + 0.5 * dphi0]]


def table1_state(dphi0=0.001 * np.pi, rho=TABLE1_RHO):
    return EnsembleState.from_groups(rho, template_phases(dphi0))


def sigma_z2():
    return pauli_to_coupling(PauliCoefficients(0, 0, 0, 2))


def sigma_xz():
    return pauli_to_coupling(PauliCoefficients(0, 1, 0, 1))


def sigma_x():
    return pauli_to_coupling(PauliCoefficients(0, 1, 0, 0))


def identity2():
    return pauli_to_coupling(PauliCoefficients(2, 0, 0, 0))


def unit_coupling():
    "dim = 1, R = 1: the reduced single-value system"
    return CouplingMatrix([[1.0]], [[0.0]])


def random_state(rng, dim=2, max_per_value=3, phase_scale=1.0):
    "A valid state with every value occupied"
    a, phi, rho = [], [], []
    for value in range(dim):
        count = rng.integers(1, max_per_value + 1)
        a.extend([value] * count)
        phi.extend(rng.uniform(-phase_scale, phase_scale, count))
        rho.extend(rng.uniform(0.05, 1.0, count))
    rho = np.array(rho)
    return EnsembleState(a, phi, rho / rho.sum(), dim=dim)


def random_coupling(rng, dim=2):
    "Symmetric R > 0 with antisymmetric, zero-diagonal beta"
    R = rng.uniform(0.2, 2.0, (dim, dim))
    R = 0.5 * (R + R.T)
    beta = np.triu(rng.uniform(-2.5, 2.5, (dim, dim)), 1)
    beta = beta - beta.T
    return CouplingMatrix(R, beta)


def brute_force_rates(s, m, k, model='a'):
    """Both evolution laws summed pair by pair in extended precision

    Written straight from the per-entry sums, independent of the
    vectorized implementation.
    """
    k = parse_kernel(k)
    ld = np.longdouble
    n = len(s)
    rho = [ld(r) for r in s.rho]
    phi = [ld(p) for p in s.phi]
    totals = [ld(0)] * s.dim
    for i in range(n):
        totals[s.a[i]] += rho[i]
    tilde = []
    for i in range(n):
        acc = ld(0)
        for j in range(n):
            if s.a[i] == s.a[j]:
                acc += rho[j] * ld(eval_kernel(k, float(phi[i] - phi[j])))
        tilde.append(acc)
    dphi = np.zeros(n, dtype=ld)
    drho = np.zeros(n, dtype=ld)
    for i in range(n):
        if totals[s.a[i]] == 0:
            continue
        for j in range(n):
            if totals[s.a[j]] == 0:
                continue
            R = ld(m.R[s.a[i], s.a[j]])
            arg = phi[i] - phi[j] + ld(m.beta[s.a[i], s.a[j]])
            if model == 'a':
                pref_phi = (rho[j] / totals[s.a[j]] *
                            np.sqrt(tilde[j] / tilde[i]))
                pref_rho = (rho[i] * rho[j] /
                            (totals[s.a[i]] * totals[s.a[j]]) *
                            np.sqrt(tilde[i] * tilde[j]))
            else:
                pref_phi = rho[j] / np.sqrt(tilde[j] * tilde[i])
                pref_rho = rho[i] * rho[j] / np.sqrt(tilde[j] * tilde[i])
            dphi[i] += pref_phi * R * np.cos(arg)
            drho[i] += pref_rho * 2 * R * np.sin(arg)
    return dphi, drho


def equilibrium_rates(rho, phi, m):
    "Schrodinger right-hand sides in (rho, phi) form, one entry per value"
    rho = np.asarray(rho, dtype=float)
    phi = np.asarray(phi, dtype=float)
    dim = len(rho)
    dphi = np.zeros(dim)
    drho = np.zeros(dim)
    for a in range(dim):
        for b in range(dim):
            arg = phi[a] - phi[b] + m.beta[a, b]
            dphi[a] += np.sqrt(rho[b] / rho[a]) * m.R[a, b] * np.cos(arg)
            drho[a] += 2 * np.sqrt(rho[a] * rho[b]) * m.R[a, b] * np.sin(arg)
    return dphi, drho


def short_experiment(kernel='cosine', t_end=10.0, **extra):
    "A ten-time-unit sigma_xz run small enough for the fast test suite"
    doc = {'name': 'short-{}'.format(kernel),
           'hamiltonian': {'cx': 1.0, 'cz': 1.0},
           'kernel': kernel,
           'model': 'a',
           'initial': {'rho': [list(g) for g in TABLE1_RHO],
                       'phi': template_phases(0.1 * np.pi)},
           'integrator': {'dt': 0.01, 't_end': t_end, 'snapshot_stride': 10,
                          'mode': 'fixed'},
           'diagnostics': {'horizon': t_end}}
    doc.update(extra)
    return doc
