import numpy as np
import pytest

from powermatrix import Center, polynomial


def disc(rng, n, radius=1.0):
    """``n`` complex numbers uniform in the disc of the given radius."""
    r = radius * np.sqrt(rng.uniform(size=n))
    return r * np.exp(2j * np.pi * rng.uniform(size=n))


def random_map(rng, degree, order, radius=1.0, center=Center.ZERO):
    """Polynomial with leading index 1 and a nonzero linear coefficient."""
    c = disc(rng, degree, radius)
    c[0] = (0.5 + 0.5 * abs(c[0])) * np.exp(2j * np.pi * rng.uniform())
    return polynomial(c, 1, order, center)


def random_generator(rng, degree, order, radius=1.0, center=Center.ZERO):
    """Generator with ``degree`` coefficients starting at ``h_1``."""
    c = disc(rng, degree, radius)
    if c[0] == 0:
        c[0] = 0.1
    return polynomial(c, 1, order, center)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
