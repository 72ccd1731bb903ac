import math

import numpy as np
import pytest
from scipy.special import eval_hermite

from fastgate.basis import BasisTruncation, PhysicalParams


def oracle_wavefunction(n, lam, x):
    """Hermite-Gaussian built from scipy's physicists' polynomials."""
    xi = np.asarray(x, dtype=float) / lam
    norm = 1.0 / math.sqrt(2.0 ** n * math.factorial(n) * math.sqrt(math.pi) * lam)
    return norm * eval_hermite(n, xi) * np.exp(-0.5 * xi * xi)


@pytest.fixture(scope="session")
def params():
    return PhysicalParams.from_ratio(1.2, epsilon=0.0547, length_unit="well2")


@pytest.fixture(scope="session")
def small_trunc():
    return BasisTruncation(2, 2)


@pytest.fixture(scope="session")
def trunc():
    return BasisTruncation(4, 4)


# criterion number -> "PASS"/"FAIL" line, filled by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def record(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
