import pytest

from strongchain import AffineField, ChainParams, ConstantField, PowerLaw


@pytest.fixture
def unit_chain():
    """Factory for chains on [0, 1] with f(r) = r^-a."""

    def make(n, field=None, a=2.0, **kw):
        return ChainParams(n, 1.0, law=PowerLaw(a), field=field or ConstantField(0.0), **kw)

    return make


@pytest.fixture
def linear_field():
    return AffineField(1.0, -1.0)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion; the line is printed in the terminal summary."""
    state = {"detail": ""}
    yield state
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    name = request.node.name
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} {name} {state['detail']}".rstrip())


@pytest.hookimpl(hookwrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
