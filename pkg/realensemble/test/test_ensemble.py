from __future__ import (absolute_import, division, print_function,
                        unicode_literals)

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from realensemble.core import ConfigurationError, NormalizationError
from realensemble.ensemble import (EnsembleState, EvolutionLaw,
                                   SingularConfigurationError,
                                   collapse_to_equilibrium, rho_tilde,
                                   rhs_model_a, rhs_model_b)
from realensemble.hamiltonian import CouplingMatrix
from realensemble.kernels import CosineKernel, FlatKernel, SpikedKernel

from .utils import (brute_force_rates, equilibrium_rates, random_coupling,
                    random_state, sigma_xz, sigma_z2)

PI = np.pi


def test_state_validation():
    with pytest.raises(NormalizationError):
        EnsembleState([0, 1], [0, 0], [0.5, 0.6])
    with pytest.raises(NormalizationError):
        EnsembleState([0, 1], [0, 0], [1.2, -0.2])
    # value 1 has no entry
    with pytest.raises(ConfigurationError):
        EnsembleState([0, 0], [0, 1], [0.5, 0.5], dim=2)
    with pytest.raises(ConfigurationError):
        EnsembleState([0, 1], [0, np.nan], [0.5, 0.5])
    with pytest.raises(ConfigurationError):
        EnsembleState([], [], [])
    with pytest.raises(ConfigurationError):
        EnsembleState.from_groups([[0.5], [0.5]], [[0.0, 1.0], [0.0]])


def test_state_accessors(table1):
    assert len(table1) == 6
    assert table1.dim == 2
    assert_allclose(table1.value_probabilities(), [0.3, 0.7])
    assert_array_equal(table1.phase_index_within_value(), [0, 1, 2, 0, 1, 2])
    assert not table1.is_equilibrium()
    assert EnsembleState.from_dict(table1.to_dict()) == table1


@pytest.mark.parametrize('k,expected', [
    (CosineKernel(), 0.2),
    (FlatKernel(), 0.5),
])
def test_rho_tilde(k, expected):
    s = EnsembleState.from_entries([(0, 0, 0.2), (0, PI, 0.3), (1, 0, 0.5)])
    assert_allclose(rho_tilde(s, k, 0), expected, atol=1e-15)
    # a lone entry sees only itself
    assert_allclose(rho_tilde(s, k, 2), 0.5)


def test_equilibrium_example():
    s = EnsembleState([0, 1], [0, PI / 2], [0.3, 0.7])
    for rhs in (rhs_model_a, rhs_model_b):
        d = rhs(s, sigma_z2(), SpikedKernel(100))
        assert_allclose(d.dphi, [2, -2], atol=1e-14)
        assert_allclose(d.drho, [0, 0], atol=1e-15)


@pytest.mark.parametrize('k,model', [
    ('spiked:100', 'a'),
    ('cosine', 'b'),
    ('cosine', 'a'),
    ('flat', 'b'),
])
def test_table1_matches_brute_force(table1, k, model):
    law = EvolutionLaw(sigma_z2(), k, model)
    d = law(table1)
    dphi, drho = brute_force_rates(table1, sigma_z2(), k, model)
    assert_allclose(d.dphi, dphi.astype(float), rtol=1e-12, atol=1e-14)
    assert_allclose(d.drho, drho.astype(float), rtol=1e-12, atol=1e-14)


def test_random_states_match_brute_force(rng):
    for _ in range(20):
        s = random_state(rng, dim=3, phase_scale=2.0)
        m = random_coupling(rng, 3)
        for model in ('a', 'b'):
            d = EvolutionLaw(m, 'cosine', model)(s)
            dphi, drho = brute_force_rates(s, m, 'cosine', model)
            assert_allclose(d.dphi, dphi.astype(float), rtol=1e-11,
                            atol=1e-13)
            assert_allclose(d.drho, drho.astype(float), rtol=1e-11,
                            atol=1e-13)


@pytest.mark.parametrize('model', ['a', 'b'])
@pytest.mark.parametrize('k', [FlatKernel(), CosineKernel(), SpikedKernel(3)])
def test_probability_conserved(rng, model, k):
    for _ in range(50):
        s = random_state(rng, dim=int(rng.integers(2, 5)), phase_scale=0.8)
        m = random_coupling(rng, s.dim)
        d = EvolutionLaw(m, k, model)(s)
        assert abs(d.drho.sum()) < 1e-12 * max(1, np.abs(d.drho).max())


@pytest.mark.parametrize('model', ['a', 'b'])
def test_equilibrium_reduces_to_schrodinger(rng, model):
    for _ in range(30):
        rho = rng.uniform(0.05, 1, 3)
        rho /= rho.sum()
        phi = rng.uniform(-PI, PI, 3)
        m = random_coupling(rng, 3)
        s = EnsembleState([0, 1, 2], phi, rho)
        d = EvolutionLaw(m, 'spiked:100', model)(s)
        dphi, drho = equilibrium_rates(rho, phi, m)
        assert_allclose(d.dphi, dphi, rtol=1e-12, atol=1e-12)
        assert_allclose(d.drho, drho, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize('model', ['a', 'b'])
def test_time_reversal(rng, model):
    for _ in range(30):
        s = random_state(rng, dim=2, phase_scale=1.5)
        m = random_coupling(rng, 2)
        reversed_m = CouplingMatrix(m.R, -m.beta)
        forward = EvolutionLaw(m, 'cosine', model)(s)
        backward = EvolutionLaw(reversed_m, 'cosine', model)(
            s.replace(phi=-s.phi))
        assert_allclose(backward.dphi, forward.dphi, rtol=1e-13, atol=1e-14)
        assert_allclose(backward.drho, -forward.drho, rtol=1e-13, atol=1e-14)


def test_flat_kernel_models_agree(rng):
    for _ in range(200):
        s = random_state(rng, dim=int(rng.integers(1, 4)), phase_scale=PI)
        m = random_coupling(rng, s.dim)
        a = EvolutionLaw(m, FlatKernel(), 'a')(s)
        b = EvolutionLaw(m, FlatKernel(), 'b')(s)
        assert_allclose(a.dphi, b.dphi, rtol=1e-12, atol=1e-14)
        assert_allclose(a.drho, b.drho, rtol=1e-12, atol=1e-14)


def test_zero_occupancy_is_inert():
    s = EnsembleState([0, 0, 1], [0, 0.1, 0.5], [0.4, 0.6, 0.0])
    for model in ('a', 'b'):
        d = EvolutionLaw(sigma_xz(), 'cosine', model)(s)
        assert d.dphi[2] == 0
        assert d.drho[2] == 0
        dphi, drho = brute_force_rates(s, sigma_xz(), 'cosine', model)
        assert_allclose(d.dphi, dphi.astype(float), atol=1e-14)
        assert_allclose(d.drho, drho.astype(float), atol=1e-14)


def test_entries_below_floor_are_frozen(table1):
    law = EvolutionLaw(sigma_xz(), 'cosine', floor=1e-14)
    a = np.append(table1.a, 1)
    phi = np.append(table1.phi, 2.0)
    rho = np.append(table1.rho, 1e-16)
    dphi, drho = law.rates(a, phi, rho)
    assert dphi[-1] == 0 and drho[-1] == 0
    ref_phi, ref_rho = law.rates(table1.a, table1.phi, table1.rho)
    assert_allclose(dphi[:-1], ref_phi, rtol=1e-14)
    assert_allclose(drho[:-1], ref_rho, rtol=1e-14, atol=1e-16)


def test_singular_configuration():
    s = EnsembleState.from_entries([(0, 0, 1.0), (0, 1.0, 0.0),
                                    (1, 0, 0.0)])
    law = EvolutionLaw(sigma_xz(), 'spiked:100', floor=0.0)
    with pytest.raises(SingularConfigurationError) as excinfo:
        law(s)
    assert excinfo.value.value == 0
    assert excinfo.value.entry == 1
    assert 'value 0' in str(excinfo.value)
    # the default floor freezes the empty entry instead
    d = EvolutionLaw(sigma_xz(), 'spiked:100')(s)
    assert_array_equal(d.drho, [0, 0, 0])


def test_pair_flows(rng):
    s = random_state(rng, dim=3)
    law = EvolutionLaw(random_coupling(rng, 3), 'cosine', 'b')
    J = law.pair_flows(s.a, s.phi, s.rho)
    assert_allclose(J, -J.T, atol=1e-15)
    assert_allclose(J.sum(axis=1), law(s).drho, atol=1e-14)


def test_unordered_sums_agree(rng):
    s = random_state(rng, dim=3, max_per_value=8)
    m = random_coupling(rng, 3)
    ordered = EvolutionLaw(m, 'cosine', ordered=True)(s)
    blas = EvolutionLaw(m, 'cosine', ordered=False)(s)
    assert_allclose(blas.dphi, ordered.dphi, rtol=1e-12, atol=1e-14)
    assert_allclose(blas.drho, ordered.drho, rtol=1e-12, atol=1e-14)


def test_scaled_law(table1):
    law = EvolutionLaw(sigma_xz(), 'cosine')
    base = law(table1)
    doubled = law.scaled(2)(table1)
    assert_allclose(doubled.dphi, 2 * base.dphi, rtol=1e-15)
    assert_allclose(doubled.drho, 2 * base.drho, rtol=1e-15)


def test_law_arguments():
    with pytest.raises(ConfigurationError):
        EvolutionLaw(sigma_xz(), 'cosine', model='c')
    with pytest.raises(ConfigurationError):
        EvolutionLaw(sigma_xz(), 'cosine', floor=-1)
    assert EvolutionLaw(sigma_xz(), 'cosine', model='B').model == 'b'


def test_collapse_examples(table1):
    s = EnsembleState.from_entries([(0, 0, 0.25), (0, 0.2, 0.25),
                                    (1, 1, 0.5)])
    c = collapse_to_equilibrium(s)
    assert_array_equal(c.a, [0, 1])
    assert_allclose(c.phi, [0.1, 1.0], atol=1e-14)
    assert_allclose(c.rho, [0.5, 0.5])

    s = EnsembleState.from_entries([(0, 0, 0.1), (0, 0.4, 0.3), (1, 2, 0.6)])
    assert_allclose(collapse_to_equilibrium(s).phi[0], 0.3, atol=1e-14)

    eq = EnsembleState([0, 1], [0.3, 2.0], [0.4, 0.6])
    assert collapse_to_equilibrium(eq) == eq

    c = collapse_to_equilibrium(table1)
    assert c.is_equilibrium()
    assert_allclose(c.rho, [0.3, 0.7])
