"""Shared fixtures: the two canonical pod networks, generated once per session."""

import pytest

from linkalign.fixtures import FixtureConfig, generate


@pytest.fixture(scope="session")
def het_fixture():
    return generate(FixtureConfig())


@pytest.fixture(scope="session")
def base_fixture():
    return generate(FixtureConfig(configuration="base"))
