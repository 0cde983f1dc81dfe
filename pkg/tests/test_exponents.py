import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sheetlab._validation import ValidationError
from sheetlab.exponents import (INF, SpectrumInput, bounds_table, brownian_spectrum, dual,
                                generalized_st_q, hambrook_laba_q, knapp_constraint,
                                necessary_q_bm, phase_transition, report, stein_tomas_q,
                                sufficient_q_bm)


def test_stein_tomas_examples():
    assert stein_tomas_q(1, F(3, 2), 2) == 4
    assert stein_tomas_q(5, 5, 5) == 2
    assert stein_tomas_q(2, F(5, 2), 3) == 3
    assert stein_tomas_q(0, 1, 2) == INF


@pytest.mark.parametrize("k, q, theta", [(1, F(4), F(0)), (2, F(3), F(0)), (3, F(26, 9), F(2, 5))])
def test_generalized_st_examples(k, q, theta):
    t = generalized_st_q(SpectrumInput.brownian(k))
    assert (t.q, t.optimal_theta) == (q, theta)


def test_generalized_matches_closed_form_for_many_k():
    for k in range(1, 51):
        t = generalized_st_q(SpectrumInput.brownian(k))
        assert t.q == sufficient_q_bm(k)
        if k > 2:
            assert t.optimal_theta == phase_transition(k)


def test_tabulated_curve_agrees():
    th = np.linspace(0, 1, 141)  # contains the crossing 4/7, so interpolation is exact
    spec = SpectrumInput(F(9, 2), 5, table=tuple((t, min(4 + t / 2, 2 + 4 * t)) for t in th))
    t = generalized_st_q(spec)
    assert t.q == pytest.approx(float(sufficient_q_bm(4)), abs=1e-6)
    assert t.optimal_theta == pytest.approx(float(phase_transition(4)), abs=1e-3)


def test_no_admissible_theta():
    spec = SpectrumInput(F(1), 2, branches=((F(0), F(0)),))
    t = generalized_st_q(spec)
    assert t.q == INF and not t.admissible


def test_sufficient_and_necessary_values():
    assert [sufficient_q_bm(k) for k in (1, 2, 5)] == [4, 3, F(14, 5)]
    assert [necessary_q_bm(k) for k in (1, 2, 3)] == [3, F(5, 2), F(7, 3)]
    assert dual(necessary_q_bm(2)) == F(5, 3)


def test_knapp_constraint():
    assert knapp_constraint(1, 2, F(1, 2)) == 4
    for k in range(1, 5):
        for q in (2, 3, 4):
            assert knapp_constraint(k, q, F(1, 2)) == F(2 * k * q, 2 * k * (q - 1) - 1)
    # p = 2 at alpha = 1/2 reproduces q = 2 + 1/k
    assert knapp_constraint(3, F(7, 3), F(1, 2)) == 2
    assert knapp_constraint(1, 1, 1) == INF


def test_hambrook_laba():
    assert hambrook_laba_q(1) == F(8, 3)
    assert hambrook_laba_q(2) == F(12, 5)
    assert all(hambrook_laba_q(k) < necessary_q_bm(k) for k in range(2, 21))


def test_report_k3():
    r = report(3)
    assert (r.sufficient_q, r.necessary_q, r.hambrook_laba_q, r.stein_tomas_q) == (
        F(26, 9), F(7, 3), F(16, 7), F(3))
    assert r.duals["sufficient_q"] == F(26, 17)
    assert all(r.strict.values())


@given(st.integers(1, 50))
def test_report_invariants(k):
    r = report(k)
    assert r.necessary_q <= r.sufficient_q
    assert 0 <= r.optimal_theta <= 1
    for name in ("sufficient_q", "necessary_q", "hambrook_laba_q", "stein_tomas_q"):
        q = getattr(r, name)
        assert 1 / q + 1 / r.duals[name] == 1


def test_monotone_trends_and_stein_tomas_dominance():
    suff = [sufficient_q_bm(k) for k in range(2, 51)]
    nec = [necessary_q_bm(k) for k in range(1, 51)]
    assert all(a > b for a, b in zip(suff, suff[1:]))
    assert all(a > b for a, b in zip(nec, nec[1:]))
    for k in range(1, 51):
        st_q = report(k).stein_tomas_q
        assert (sufficient_q_bm(k) < st_q) if k >= 3 else (sufficient_q_bm(k) == st_q)


def test_spectrum_helpers_and_inputs():
    assert brownian_spectrum(2, F(1)) == F(5, 2)
    assert phase_transition(2) is None
    with pytest.raises(ValidationError):
        report(0)
    with pytest.raises(ValidationError):
        SpectrumInput(F(1), 2, table=((0.0, 1.0), (0.5, 0.5)))
    with pytest.raises(ValidationError):
        dual(F(1))
    assert dual(INF) == 1 and math.isinf(INF)


def test_bounds_table_rows():
    t = bounds_table(3)
    assert t.names == ["k", "sufficient", "necessary", "hambrook_laba", "stein_tomas"]
    assert t.rows[2] == (3, F(26, 9), F(7, 3), F(16, 7), F(3))
