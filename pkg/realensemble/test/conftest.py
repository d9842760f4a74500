import numpy as np
import pytest

from .utils import sigma_xz, sigma_z2, table1_state


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False,
                     help='run the long acceptance runs')


def pytest_configure(config):
    config.addinivalue_line('markers',
                            'slow: long acceptance run, needs --runslow')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow', default=False):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope='function')
def rng():
    '''A freshly seeded Generator per test so draws do not depend on
    test order.

    '''
    return np.random.default_rng(20170321)


@pytest.fixture(scope='module')
def table1():
    "The three-phase-per-value initial condition at dphi0 = 0.001 pi"
    return table1_state()


@pytest.fixture(params=['sigma_z2', 'sigma_xz'], scope='module')
def coupling(request):
    return {'sigma_z2': sigma_z2, 'sigma_xz': sigma_xz}[request.param]()
