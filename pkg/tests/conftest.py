import pytest

CRITERIA = {
    "AC1": "partition of unity",
    "AC2": "decomposition reassembly",
    "AC3": "singular value and Schatten properties",
    "AC4": "choose_N bracket",
    "AC5": "R_N + Q_N split identity",
    "AC6": "upper-bound boundedness, selfadjoint and unitary",
    "AC7": "normal, tuple and contraction variants",
    "AC8": "converse witnesses",
    "AC9": "rank-one lower bound",
    "AC10": "line transfer",
    "AC11": "modulus calculus",
}

_outcomes: dict = {}
_notes: dict = {}


@pytest.fixture
def acceptance_note(request):
    """Append a line to the acceptance summary of the test's criterion."""
    key = request.node.get_closest_marker("acceptance").args[0]
    return lambda text: _notes.setdefault(key, []).append(text)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or not marker.args:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes.setdefault(marker.args[0], []).append((item.name, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key, label in CRITERIA.items():
        results = _outcomes.get(key)
        if results is None:
            continue
        failed = [name for name, ok in results if not ok]
        status = "FAIL" if failed else "PASS"
        detail = f" ({len(failed)}/{len(results)} checks failed: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"{status} {key} {label}{detail}")
        for text in _notes.get(key, []):
            terminalreporter.write_line(f"    {text}")
