import numpy as np
import pytest

from bfcert.codes import build_qc2, random_qc2_girth6

_acceptance: dict[int, list[str]] = {}
_titles: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): one numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    number, title = mark.args
    _titles[number] = title
    if report.when == "call" or (report.when == "setup" and not report.passed):
        if report.skipped and hasattr(report, "wasxfail"):
            status = "FAIL (known, see decisions ledger)"
        elif report.skipped:
            status = "SKIPPED"
        elif report.passed:
            status = "PASS"
        else:
            status = "FAIL"
        _acceptance.setdefault(number, []).append(status)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        states = _acceptance[number]
        if all(s == "PASS" for s in states):
            status = "PASS"
        else:
            status = next(s for s in states if s != "PASS")
        terminalreporter.write_line(f"criterion {number:2d} [{status}] {_titles[number]}")


@pytest.fixture(scope="session")
def small_qc():
    """Girth-6 two-circulant code with p=31, v=3."""
    S0, S1 = random_qc2_girth6(31, 3, np.random.default_rng(7))
    return build_qc2(31, S0, S1, name="small")


@pytest.fixture(scope="session")
def toy_qc():
    """The 5x10 example with S0={0,1,3}, S1={0,2,3}."""
    return build_qc2(5, [0, 1, 3], [0, 2, 3], name="toy")
