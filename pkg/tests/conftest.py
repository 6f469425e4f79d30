import numpy as np
import pytest
from hypothesis import settings

from h4iqpe.experiments import build_system

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def sys80():
    return build_system(80.0)


@pytest.fixture(scope="session")
def sys898():
    return build_system(89.8)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_state(rng, n):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


# --- acceptance report: one pass/fail line per criterion, printed after the run ----

_ACCEPTANCE = {}


@pytest.fixture
def report():
    def record(criterion, ok, detail=""):
        _ACCEPTANCE[criterion] = (bool(ok), detail)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k[1:])):
        ok, detail = _ACCEPTANCE[key]
        tr.write_line(f"{key:<4s} {'PASS' if ok else 'FAIL'}  {detail}")
