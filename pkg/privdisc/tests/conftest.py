"""pytest fixtures"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
import pytest

from privdisc.crypto.entropy import SeededEntropy
from privdisc.crypto.pairing import load_group
from privdisc.simnet.scenarios import build_world

ROOT = 'dev.v.io'
TV = 'dev.v.io/u/Alice/Devices/TV'
PHONE = 'dev.v.io/u/Alice/Devices/Phone'
BOB = 'dev.v.io/u/Bob'
TV_POLICY = 'dev.v.io/u/Alice'


def pytest_addoption(parser):
    parser.addoption(
        '--run-slow', action='store_true', default=False, help="run acceptance-size tests"
    )


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: acceptance-size runs, skipped without --run-slow')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--run-slow'):
        return
    skip = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope='session')
def group():
    return load_group()


@pytest.fixture(scope='session')
def world():
    """One provider, a TV that only talks to Alice's names, Alice's phone and Bob"""
    return build_world('privdisc-tests', ROOT, [TV, PHONE, BOB], policies={TV: TV_POLICY})


@pytest.fixture()
def entropy(request):
    return SeededEntropy(request.node.name)


@pytest.fixture()
def tv(world):
    return world.principals[TV]


@pytest.fixture()
def phone(world):
    return world.principals[PHONE]


@pytest.fixture()
def bob(world):
    return world.principals[BOB]
