import pytest

ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """check(ok, detail): records a PASS/FAIL line for the calling acceptance test, then asserts."""
    num = request.node.get_closest_marker("criterion").args[0]

    def check(ok, detail):
        ACCEPTANCE[num] = f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(ACCEPTANCE[num])
        assert ok, detail

    return check


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[num])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark and rep.when == "call" and rep.failed and mark.args[0] not in ACCEPTANCE:
        ACCEPTANCE[mark.args[0]] = f"criterion {mark.args[0]}: FAIL  raised {call.excinfo.typename}"
