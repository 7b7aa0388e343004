import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from srnreduce import zoo  # noqa: E402


def canon(species, y):
    """Order-independent complex label such as ``2I+S``."""
    terms = sorted((f"{c}{s}" if c > 1 else s) for s, c in zip(species, y) if c)
    return "+".join(terms) if terms else "0"


def reduced_table(red, z):
    return {(canon(red.species, rr.reactant), canon(red.species, rr.product)): tau
            for rr, tau in red.active_reactions(z)}


@pytest.fixture
def load():
    return zoo.load


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


def record_acceptance(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
