import os

import numpy as np
import pytest

from bribery_ge.counterfactual import stylized_economies

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, label): acceptance criterion")


@pytest.fixture
def rng():
    """Monte Carlo generator; BRIBERY_GE_SEED overrides the fixed default seed."""
    return np.random.default_rng(int(os.environ.get("BRIBERY_GE_SEED", "20240917")))


@pytest.fixture(scope="session")
def stylized():
    return stylized_economies()


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for mark in report.user_properties:
        if mark[0] == "criterion":
            number, label = mark[1]
            prev = _ACCEPTANCE.get(number, (label, "PASS"))[1]
            outcome = "PASS" if report.outcome == "passed" and prev == "PASS" else "FAIL"
            _ACCEPTANCE[number] = (label, outcome)


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", m.args))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        label, outcome = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d} {outcome}: {label}")
