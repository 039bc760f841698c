from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dualcert.gridfunc import GridFunction

settings.register_profile("dualcert", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("dualcert")

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict = {}


def record(num: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[num] = (ok, detail)
    print(f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}")


def dense_fn(q: int, ell: int, n: int, vals) -> GridFunction:
    return GridFunction(q, ell, n, np.array([Fraction(v) for v in vals], dtype=object))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
