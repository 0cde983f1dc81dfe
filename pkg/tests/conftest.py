import numpy as np
import pytest

from sheetlab.paths import gen_path, make_sheet


@pytest.fixture(scope="session")
def path12():
    return gen_path(42, 12)


@pytest.fixture(scope="session")
def sheet2():
    return make_sheet([11, 12], 10)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance bookkeeping: one pass/fail line per criterion at the end of the run
ACCEPTANCE = {}
CRITERIA = {
    1: "exact exponent report",
    2: "transform vs Riemann oracle",
    3: "k=2 factorisation vs 2-D Riemann sum",
    4: "decay envelope stability and horizontal slopes",
    5: "spectrum curve vs theory",
    6: "Cases 3+4 dominate the k=1 energy",
    7: "Frostman exponents",
    8: "Knapp scaling exponents",
    9: "synthetic oracles for the energy machinery",
    10: "manifest replay reproduces CSV bytes",
}


@pytest.fixture
def record():
    def _record(n, ok, detail):
        ACCEPTANCE[n] = (bool(ok), detail)
        return bool(ok)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, name in CRITERIA.items():
        ok, detail = ACCEPTANCE.get(n, (False, "not run or raised before recording"))
        terminalreporter.write_line(f"criterion {n:>2} {'PASS' if ok else 'FAIL'}: {name}; {detail}")
