import pytest

from tbcompact.grammar import Grammar, rule


def coordination(flat=2, coord=20, base=100):
    """The NP coordination grammar with the given counts."""
    return Grammar([
        rule("NP -> DT NN CC DT NN", flat),
        rule("NP -> NP CC NP", coord),
        rule("NP -> DT NN", base),
    ])


@pytest.fixture
def coord_grammar():
    return coordination()


@pytest.fixture
def unary_cycle_grammar():
    return Grammar([rule("B -> C"), rule("C -> B"), rule("A -> B B"), rule("A -> C C")])


ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(n, title, ok, detail)``."""
    def record(number, title, ok, detail=""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        ACCEPTANCE.append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
