"""
Common configuration for the test suite.
"""
import pathlib
import sys

import pytest

ROOT_PATH = pathlib.Path(__file__).parents[0].resolve()

sys.path.append(str(ROOT_PATH / "spectral-zeta"))


def pytest_addoption(parser):
    group = parser.getgroup("general")
    group.addoption(
        "--run-slow",
        action="store_true",
        help="If provided, tests marked as slow will be run",
    )


def pytest_configure(config):
    """Monkey patch the function cwd_relative_nodeid

    returns the description of a test for the short summary table. Monkey patch
    it to reduce the verbosity of the test names in the table.  This leaves
    enough room to see the information about the test failure in the summary.
    """
    old_cwd_relative_nodeid = config.cwd_relative_nodeid

    def cwd_relative_nodeid(*args):
        result = old_cwd_relative_nodeid(*args)
        result = result.replace("spectral-zeta/spectral_zeta/tests/", "")
        result = result.replace("::test_", "::")
        return result

    config.cwd_relative_nodeid = cwd_relative_nodeid


def pytest_collection_modifyitems(config, items):
    """Called after collect is completed.
    Parameters
    ----------
    config : pytest config
    items : list of collected items
    """
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="slow test, use --run-slow to run it")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
