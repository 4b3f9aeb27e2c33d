import configparser
from pathlib import Path

import pytest

# From the pytest docs:
#
# "The conftest.py file serves as a means of providing fixtures for an entire
# directory. Fixtures defined in a conftest.py can be used by any test in that
# package without needing to import them (pytest will automatically discover
# them)."

test_ini = Path(__file__).parent / "test.ini"


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="Run the slow Monte-Carlo acceptance tests")


def pytest_configure(config):
    config.addinivalue_line("markers",
                            "slow: a slow Monte-Carlo acceptance test, run "
                            "with --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return

    skip_slow = pytest.mark.skip(reason="Requires the --runslow option")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def config() -> configparser.ConfigParser:
    # Small estimation and envelope settings so that command line tests run
    # quickly.
    test_config = configparser.ConfigParser()
    test_config.read(test_ini)
    yield test_config
