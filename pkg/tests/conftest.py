import pytest

from mivckit import AnalysisContext, load, models


@pytest.fixture(scope="session")
def altitude():
    return load(models.source("altitude"))


@pytest.fixture(scope="session")
def triplex():
    return load(models.source("altitude3"))


@pytest.fixture(scope="session")
def triplex_fixed():
    return load(models.source("altitude3_fixed"))


@pytest.fixture
def ctx():
    with AnalysisContext() as c:
        yield c



# -- acceptance summary ----------------------------------------------------------------

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None and (rep.when == "call" or rep.failed or rep.skipped):
        number, title = mark.args
        prev = _CRITERIA.get(number, (title, "PASS"))[1]
        status = "PASS" if rep.passed and prev == "PASS" else ("SKIP" if rep.skipped else "FAIL")
        _CRITERIA[number] = (title, status)
    return rep


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}")
