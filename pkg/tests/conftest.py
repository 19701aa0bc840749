import math

from hypothesis import settings
from hypothesis import strategies as st

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def _squarefree(n):
    return all(n % (p * p) for p in range(2, math.isqrt(n) + 1))


SQUAREFREE_SMALL = [n for n in range(1, 400) if _squarefree(n)]

squarefree_q = st.sampled_from(SQUAREFREE_SMALL)
odd_squarefree_q = st.sampled_from([n for n in SQUAREFREE_SMALL if n % 2 and n > 1])
offset_sets = st.lists(st.integers(-12, 12), min_size=1, max_size=3, unique=True)


_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    n, title = crit
    _CRITERIA[n] = (title, report.outcome, report.duration)


def pytest_runtest_setup(item):
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        item.user_properties.append(("criterion", tuple(mark.args)))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, outcome, secs = _CRITERIA[n]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {verdict}  {title}  ({secs:.2f} s)")
