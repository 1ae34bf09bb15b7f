import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

# Reference coefficient sets reused as simulation generators.
GARMA_C21 = dict(beta1=1.0086, phi=(0.7512, 0.2013), theta=(0.1573,), sigma=1.0, nu=8.0)
GARCH_REF = dict(omega=0.012223, alpha1=0.080113, beta1=0.903628)


def rngs(seed: int, n: int = 2):
    return [np.random.default_rng(c) for c in np.random.SeedSequence(seed).spawn(n)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


_ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def record(ok: bool, detail: str) -> bool:
        _ACCEPTANCE[request.node.name] = (bool(ok), detail)
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
