import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sheetlab._validation import CapacityError, ValidationError
from sheetlab.paths import (AdditiveSheet, BrownianPath, gen_path, holder_probe, make_sheet,
                            sheet_from_functions, sheet_seeds)
from sheetlab.rng import derive_seed, hash_normals


def test_frozen_path_values():
    expected = [0.0, 0.32109583, 0.24427207, 0.09296973, -0.12813329,
                0.14311408, -0.0453714, -0.20207998, 0.06479118]
    np.testing.assert_allclose(gen_path(1, 3).values, expected, atol=5e-9)


def test_frozen_hash_draws():
    np.testing.assert_allclose(hash_normals(7, 2, np.arange(3)),
                               [1.54935917, -0.68033749, 0.12477256], atol=5e-9)
    assert derive_seed(5, 1, 2) == 10253705613531270966


@given(st.integers(0, 2**64 - 1), st.integers(0, 8), st.integers(1, 4))
@settings(max_examples=40, deadline=None)
def test_refinement_keeps_coarse_values(seed, level, extra):
    coarse = gen_path(seed, level).values
    fine = gen_path(seed, level + extra).values
    np.testing.assert_array_equal(fine[:: 2**extra], coarse)


def test_endpoint_variance():
    w1 = np.array([gen_path(s, 0).values[1] for s in range(4000)])
    assert abs(w1.mean()) < 0.06
    assert abs(w1.var() - 1.0) < 0.08


def test_increment_variance_matches_time_step():
    p = gen_path(3, 14)
    inc = np.diff(p.values)
    assert abs(inc.var() * p.n_segments - 1.0) < 0.05


def test_level_limits():
    with pytest.raises(CapacityError):
        gen_path(1, 40)
    with pytest.raises(ValidationError):
        gen_path(-1, 4)
    with pytest.raises(ValidationError):
        gen_path(1, 2.5)


def test_sheet_needs_distinct_seeds_and_common_level():
    with pytest.raises(ValidationError):
        make_sheet([3, 3], 4)
    with pytest.raises(ValidationError):
        AdditiveSheet((gen_path(1, 4), gen_path(2, 5)))


def test_sheet_is_additive():
    sh = make_sheet([5, 6], 6)
    t = np.array([[0.3, 0.7], [1.0, 0.0]])
    expected = sh.paths[0](t[:, 0]) + sh.paths[1](t[:, 1])
    np.testing.assert_allclose(sh(t), expected)


def test_sheet_seeds_are_distinct():
    s = sheet_seeds(0, 3, 0)
    assert len(set(s)) == 3
    assert s != sheet_seeds(0, 3, 1)


def test_from_function_and_values():
    sh = sheet_from_functions([lambda t: t**2 + 1.0], 5)
    assert sh.paths[0].values[0] == 0.0
    assert sh.paths[0].values[-1] == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        BrownianPath.from_values(np.zeros(6))


def test_holder_probe_line_and_brownian():
    line = BrownianPath.from_values(np.linspace(0, 1, 17))
    assert holder_probe(line, 0.5).constant == pytest.approx(1.0)
    p = gen_path(9, 14)
    assert holder_probe(p, 0.3).constant < holder_probe(p, 0.49).constant < 20
    with pytest.raises(ValidationError):
        holder_probe(p, 0.0)
