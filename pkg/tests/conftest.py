from collections import defaultdict

import pytest

# criterion -> list of (test name, outcome)
ACCEPTANCE: dict[str, list[tuple[str, str]]] = defaultdict(list)
TITLES: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): test belongs to an acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    TITLES[num] = title
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        if hasattr(rep, "wasxfail"):
            state = "xfail" if rep.skipped else "xpass"
        else:
            state = rep.outcome
        ACCEPTANCE[num].append((item.name, state))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE, key=int):
        results = ACCEPTANCE[num]
        ok = all(s == "passed" for _, s in results)
        line = f"{'PASS' if ok else 'FAIL'}  criterion {num}: {TITLES[num]}"
        bad = [f"{n} ({s})" for n, s in results if s != "passed"]
        if bad:
            line += "  -- not met: " + ", ".join(bad)
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240611)
