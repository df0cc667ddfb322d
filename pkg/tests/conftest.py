import importlib
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from overton import kernels
from overton.kernels import _pure

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

try:
    # import the module itself: the package attribute is None when the
    # fallback is forced through OVERTON_KERNELS=pure
    _fast = importlib.import_module("overton.kernels._fast")
except ImportError:  # extension not built
    _fast = None


def load_fast():
    if _fast is None:
        pytest.skip("compiled kernels not built")
    return _fast


@pytest.fixture
def fast():
    if _fast is None:
        pytest.skip("compiled kernels not built")
    return _fast


@pytest.fixture
def pure():
    return _pure


@pytest.fixture(params=["pure", "compiled"])
def backend(request):
    if request.param == "pure":
        return _pure
    if _fast is None:
        pytest.skip("compiled kernels not built")
    return _fast


@pytest.fixture
def compiled_active():
    return kernels.BACKEND == "compiled"


def equispaced_100():
    return -1.0 + 2.0 * np.arange(1, 101) / 101


# -- per-criterion report for the acceptance suite ------------------------

_criteria: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    marker = "test_acceptance.py::test_criterion_"
    if marker not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        outcome = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        why = ""
        if report.failed:
            crash = getattr(report.longrepr, "reprcrash", None)
            why = crash.message.splitlines()[0] if crash is not None else "error"
        _criteria[name] = (outcome, why)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda s: int(s.split("_")[2])):
        outcome, why = _criteria[name]
        number = name.split("_")[2]
        label = " ".join(name.split("_")[3:])
        line = f"criterion {number:>2}: {outcome}  {label}"
        if why:
            line += f"  ({why[:120]})"
        terminalreporter.write_line(line)
