import functools
import math

import mpmath
import pytest

from qmoment import ExtensionParam, SeriesContext, build_measure

GRID = (0.3, 0.5, 2.0, 5.0)


@functools.lru_cache(maxsize=None)
def ctx_for(q):
    return SeriesContext.for_q(q)


@functools.lru_cache(maxsize=None)
def measure_for(q, phi0):
    return build_measure(ctx_for(q), ExtensionParam(phi0))


def recurrence(q, z, n_max, dps=40):
    """Plain three-term recurrence in mpmath; shares no code with the package."""
    ctx = mpmath.MPContext()
    ctx.dps = dps
    q = ctx.mpf(q)
    b = [ctx.sqrt((q ** (n + 1) - q ** -(n + 1)) / (q - 1 / q)) for n in range(n_max + 1)]
    z = ctx.mpmathify(z)
    P, Q = [ctx.mpf(1), z / b[0]], [ctx.mpf(0), 1 / b[0]]
    for n in range(1, n_max):
        P.append((z * P[n] - b[n - 1] * P[n - 1]) / b[n])
        Q.append((z * Q[n] - b[n - 1] * Q[n - 1]) / b[n])
    return b, P, Q


@pytest.fixture(scope="session")
def ctx2():
    return ctx_for(2.0)


@pytest.fixture(scope="session")
def sigma0_q2():
    return measure_for(2.0, 0.0)


@pytest.fixture(scope="session")
def sigma_pi_q2():
    return measure_for(2.0, math.pi)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
