import time
import warnings

import numpy as np
import pytest

from homrate import GaussianWavePacket, ParaxialWarning

_SESSION_START = time.perf_counter()
SUITE_BUDGET_S = 120.0

#: filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def random_packet(rng, smax=0.15, coupled=None, k0_tilt=0.05, r0_span=5.0):
    """A random valid packet with widths up to ``smax`` (|k0| close to 1)."""
    s = rng.uniform(0.03, smax, 3)
    if coupled is None:
        coupled = rng.random() < 0.5
    s12 = None
    if coupled:
        rho = rng.uniform(-0.8, 0.8)
        s12 = s[0] * s[1] / rho
    k0 = (rng.uniform(-k0_tilt, k0_tilt), rng.uniform(-k0_tilt, k0_tilt), 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParaxialWarning)
        return GaussianWavePacket(
            k0=k0, sigma=tuple(s), sigma12=s12, r0=tuple(rng.uniform(-r0_span, r0_span, 3)),
            theta=rng.uniform(0, np.pi), phi1=rng.uniform(0, 2 * np.pi),
            phi2=rng.uniform(0, 2 * np.pi))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def reference_packet():
    return GaussianWavePacket(k0=(0.0, 0.0, 1.0), sigma=(0.05, 0.08, 0.1))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    elapsed = time.perf_counter() - _SESSION_START
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
    verdict = "PASS" if elapsed < SUITE_BUDGET_S else "FAIL"
    terminalreporter.write_line(
        f"suite runtime: {verdict} {elapsed:.1f} s (budget {SUITE_BUDGET_S:.0f} s)")
