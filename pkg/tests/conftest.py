import numpy as np
import pytest

from twistlab.seq import FiniteVector


def random_vector(rng, dim, width=20.0, sparse=False):
    """Dense-ish random FiniteVector on ``1..dim``; ``sparse`` scatters the support."""
    r = np.exp(-width * rng.random(dim))
    vals = r * np.exp(2j * np.pi * rng.random(dim))
    if sparse:
        idx = rng.choice(np.arange(1, 4 * dim + 1), size=dim, replace=False)
        return FiniteVector(idx, vals)
    return FiniteVector.dense(vals)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_acceptance_lines = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    def record(label, ok, detail=""):
        _acceptance_lines.append(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip())
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
