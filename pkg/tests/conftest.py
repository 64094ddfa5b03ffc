import numpy as np
import pytest

from gtcnet import create_app
from gtcnet.oracle import enumerate_gtc, enumerate_tree_child


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run long tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long runs, enabled with --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def app():
    app = create_app("testing")
    yield app


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def gtc_corpus():
    """Labelled galled tree-child networks for n = 1..3."""
    return {n: enumerate_gtc(n) for n in range(1, 4)}


@pytest.fixture(scope="session")
def tc_corpus():
    return {n: enumerate_tree_child(n) for n in range(1, 4)}
