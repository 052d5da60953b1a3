import sys

import numpy as np
import pytest


def random_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_hermitian(rng, n):
    m = random_complex(rng, (n, n))
    return m + m.conj().T


def random_density(rng, dims, rank=None):
    """Random mixed density matrix (flat) on the product space ``dims``."""
    d = int(np.prod(dims))
    k = rank or d
    a = random_complex(rng, (d, k))
    rho = a @ a.conj().T
    rho = 0.5 * (rho + rho.conj().T)  # exactly Hermitian
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
