import pytest

_ACCEPTANCE = []


@pytest.fixture
def record_criterion():
    """Record one acceptance line; printed in the terminal summary."""

    def _record(cid, passed, measured, bound):
        _ACCEPTANCE.append((cid, bool(passed), measured, bound))
        print(f"ACCEPTANCE {cid}: {'PASS' if passed else 'FAIL'} measured={measured} bound={bound}")
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, passed, measured, bound in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {cid}  measured={measured}  bound={bound}")
