import pytest

from setfree.family import set_family, sumfree_family


@pytest.fixture(scope="session")
def set3():
    return set_family(3)


@pytest.fixture(scope="session")
def set_q():
    return set_family("generic")


@pytest.fixture(scope="session")
def sumfree5():
    return sumfree_family(5)


@pytest.fixture(scope="session")
def set_polys(set3):
    from setfree.coeffpoly import char_polys

    return char_polys(set3, 7)


_criteria = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None and rep.when == "call":
        _criteria.append((marker.args[0], marker.args[1], rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num, desc, outcome in sorted(_criteria):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {status}  {desc}")
