import pytest
from hypothesis import strategies as st

from picpos.lattice import BlowupContext, DivisorClass

_acceptance_lines = []


def classes(r, lo=-50, hi=50):
    coeff = st.integers(lo, hi)
    return st.builds(DivisorClass, coeff, st.tuples(*[coeff] * r))


@st.composite
def class_pairs(draw, max_r=20):
    r = draw(st.integers(1, max_r))
    return draw(classes(r)), draw(classes(r))


@pytest.fixture
def ctx310():
    return BlowupContext(3, 10)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    num, title = marker.args
    _acceptance_lines.append((num, title, "PASS" if rep.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, status in sorted(_acceptance_lines):
        terminalreporter.write_line(f"[{status}] {num:>2}. {title}")
