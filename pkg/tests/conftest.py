import numpy as np
import pytest
from hypothesis import settings

from horolab import Ellipsoid, MetricSpace, PBall, Polytope

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def disc():
    return MetricSpace.hilbert(Ellipsoid.ball(2))


@pytest.fixture
def square():
    return MetricSpace.hilbert(Polytope.square())


@pytest.fixture
def ellipse():
    return MetricSpace.hilbert(Ellipsoid.axes([2.0, 1.0]))


@pytest.fixture
def pball4():
    return MetricSpace.hilbert(PBall(np.zeros(2), 1.0, 4.0))


@pytest.fixture
def poincare():
    return MetricSpace.poincare_disc()


# ---------------------------------------------------------------------------
# One PASS/FAIL line per acceptance criterion, printed after the run.

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion this test decides")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if call.when == "setup" and call.excinfo is not None:
        _criteria[number] = (title, "FAIL", f"setup error: {call.excinfo.value!r}")
    elif call.when == "call":
        if call.excinfo is None:
            detail = "; ".join(str(v) for k, v in item.user_properties if k == "measured")
        else:
            detail = (str(call.excinfo.value).splitlines() or [repr(call.excinfo.value)])[0][:160]
        _criteria[number] = (title, "PASS" if call.excinfo is None else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, verdict, detail = _criteria[number]
        line = f"criterion {number:2d} {verdict}  {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
