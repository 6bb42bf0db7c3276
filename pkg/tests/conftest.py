import pytest

_RESULTS: dict = {}


class Criterion:
    def __init__(self, number: str, title: str):
        self.number = number
        self.title = title
        self.facts: list[str] = []

    def note(self, fact: str) -> None:
        self.facts.append(fact)

    def check(self, ok: bool, fact: str) -> None:
        self.facts.append(("ok  " if ok else "BAD ") + fact)
        assert ok, fact


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion; its line is printed in the summary."""
    marker = request.node.get_closest_marker("acceptance")
    number, title = marker.args
    c = Criterion(number, title)
    yield c
    rep = getattr(request.node, "rep_call", None)
    passed = rep is not None and rep.passed
    _RESULTS[number] = (passed, title, c.facts)
    print(f"\nACCEPTANCE {number}: {'PASS' if passed else 'FAIL'} {title}")


@pytest.hookimpl(hookwrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_RESULTS, key=lambda s: (len(s), s)):
        passed, title, facts = _RESULTS[number]
        tr.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}")
        for f in facts:
            tr.write_line(f"    {f}")
