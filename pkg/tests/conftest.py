import pytest

_criteria: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def detail(request):
    """Free-form notes a criterion test wants shown next to its verdict."""
    notes: dict = {}
    request.node.criterion_notes = notes
    return notes


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        notes = getattr(item, "criterion_notes", {})
        text = ", ".join(f"{k}={v}" for k, v in notes.items())
        _criteria[mark.args[0]] = (mark.args[1], rep.passed, text)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, passed, text = _criteria[n]
        line = f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {title}"
        if text:
            line += f"  [{text}]"
        terminalreporter.write_line(line)
