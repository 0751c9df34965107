"""Shared fixtures: the worked instance, its systems, and a service client."""

import warnings

import numpy as np
import pytest

from cicregions import build_system, compose, inst_a

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from starlette.testclient import TestClient

from cicregions.service import create_app


@pytest.fixture(scope="session")
def inst_a_config():
    return inst_a()


@pytest.fixture(scope="session")
def inst_a_joint(inst_a_config):
    return compose(inst_a_config.channel, inst_a_config.aux)


@pytest.fixture(scope="session")
def dmt_a(inst_a_joint):
    return build_system("dmt", inst_a_joint)


@pytest.fixture(scope="session")
def corrected_a(inst_a_joint):
    return build_system("corrected", inst_a_joint)


@pytest.fixture(scope="session")
def client():
    with TestClient(create_app(), base_url="http://cic.test",
                    raise_server_exceptions=False) as c:
        yield c


@pytest.fixture()
def rng():
    return np.random.default_rng(2026)
