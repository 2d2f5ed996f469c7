import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is None:
        return
    n, title = m.args
    prev = _RESULTS.get(n, (title, "PASS"))[1]
    if rep.when == "call" or rep.failed:
        status = "PASS" if rep.passed and prev == "PASS" else "FAIL"
        if rep.skipped:
            status = "SKIP"
        _RESULTS[n] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        title, status = _RESULTS[n]
        terminalreporter.write_line("criterion %2d: %s  %s" % (n, status, title))
