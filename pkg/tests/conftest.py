"""Shared fixtures."""

import os

os.environ["LAB_ENV"] = "testing"

import pytest

from core.gf import make_field


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: multi-second exact computations")


@pytest.fixture(scope="session")
def f2():
    return make_field(2)


@pytest.fixture(scope="session")
def f3():
    return make_field(3)


@pytest.fixture(scope="session")
def f4():
    return make_field(2, 2)


@pytest.fixture(scope="session")
def f5():
    return make_field(5)
