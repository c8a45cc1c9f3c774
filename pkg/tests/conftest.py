import numpy as np
import pytest

from decoupler_lab.operators import PAULI

X, Y, Z, I2 = PAULI['x'], PAULI['y'], PAULI['z'], PAULI['i']


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def conj_sum(group, H):
    """Reference group average written out term by term."""
    total = np.zeros_like(H, dtype=complex)
    for g in group:
        total = total + g.conj().T @ H @ g
    return total / len(group)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get('test_acceptance')
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section('acceptance criteria')
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n][1])
