import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sheetlab._validation import CoverageError, ResolutionError, ValidationError
from sheetlab.energy import (FrostmanEstimator, SpectrumConfig, ball_mass, classify_case,
                             classify_cases, frostman_probe, growth_rate, proposal_density,
                             s_grid, sample_frequencies, spectrum_curve, spectrum_table,
                             theory_curve, threshold_fit, truncated_energy)
from sheetlab.fourier import Frequency
from sheetlab.paths import BrownianPath, AdditiveSheet, make_sheet

RADII = 2.0 ** np.arange(4, 15)


def test_density_at_unit_coordinates():
    R, lo = 2.0**14, 2.0**-4
    for k in (1, 2, 3):
        d = proposal_density(np.ones((1, k + 1)), R, lo)[0]
        assert d == pytest.approx((2.0 * math.log(R / lo)) ** -(k + 1), rel=1e-14)


def test_inverse_density_mean_is_box_volume():
    R, lo = 2.0**3, 2.0**-4
    smp = sample_frequencies(1, R, 100_000, seed=2)
    vol = (2.0 * (R - lo)) ** 2
    assert np.mean(1.0 / smp.density) == pytest.approx(vol, rel=0.01)


def test_empty_sample_set():
    smp = sample_frequencies(2, 100.0, 0)
    assert len(smp) == 0 and smp.X.shape == (0, 3)


@pytest.mark.parametrize("xi, y, case", [
    ((0.5, 0.2), 3.0, 1),
    ((8.0, 5.0), 2.0, 4),
    ((3.0, 2.0), 2.0, 3),
    ((1.5, 1.2), 2.0, 2),
    ((4.0, 0.1), 0.5, 5),
    ((4.0, 3.0), 0.5, 6),
    ((0.5, 0.2), 0.5, 0),
    ((5.0, 0.5), 2.0, 0),
])
def test_case_table(xi, y, case):
    assert classify_case(Frequency(xi, y)) == case


@given(st.lists(st.floats(-1e4, 1e4, allow_nan=False), min_size=2, max_size=4))
@settings(max_examples=200)
def test_case_tags_are_sign_and_order_invariant(row):
    row = np.array(row)
    perm = np.concatenate((row[:-1][::-1], row[-1:]))
    assert classify_case(row) == classify_case(-row) == classify_case(perm)
    assert 0 <= classify_case(row) <= 6


def test_flat_moduli_match_polar_integral():
    from scipy.integrate import quad

    smp = sample_frequencies(1, 2.0**14, 100_000, seed=9)
    radii = 2.0 ** np.arange(4, 15)
    s, theta = 1.2, 0.8
    est = truncated_energy(lambda X: np.ones(len(X)), s, theta, radii, smp)
    p = s / theta - 2.0

    def polar(r):
        return r ** (p + 1) * 4.0 * (math.pi / 2 - 2 * math.asin(smp.r_lo / r))

    exact = quad(polar, 1.0, radii[-1], limit=200)[0]
    assert abs(est.I_values[-1] - exact) < 3 * est.std_errors[-1]


def test_monotone_in_radius_and_s(sheet2):
    smp = sample_frequencies(2, 2.0**10, 5000, seed=4)
    radii = 2.0 ** np.arange(2, 11)
    low = truncated_energy(sheet2, 2.0, 0.7, radii, smp)
    high = truncated_energy(sheet2, 2.4, 0.7, radii, smp)
    assert np.all(np.diff(low.I_values) >= 0)
    assert np.all(high.I_values >= low.I_values)
    assert low.case_breakdown.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.all(low.valid)


def test_radius_outside_box_is_rejected():
    smp = sample_frequencies(1, 2.0**6, 100, seed=1)
    with pytest.raises(ValidationError):
        truncated_energy(lambda X: np.ones(len(X)), 1.0, 1.0, [2.0**12], smp)


def _synthetic(a, theta, n=100_000):
    smp = sample_frequencies(1, 2.0**14, n, seed=5)
    src = lambda X: np.linalg.norm(X, axis=1) ** (-a / 2)  # noqa: E731
    return [truncated_energy(src, s, theta, RADII, smp) for s in s_grid(1, 1.0, 0.05, 0.75)
            + (a - 1.5)]


def test_threshold_fit_synthetic():
    s_star, s_err = threshold_fit(_synthetic(1.5, 0.5), 0.5)
    assert s_star == pytest.approx(1.5, abs=0.05)
    assert s_err < 0.05


def test_growth_rate_is_monotone_in_s():
    ests = _synthetic(1.5, 1.0, n=20_000)
    beta = [growth_rate(e) for e in ests]
    assert np.all(np.diff(beta) > -0.02)


def test_threshold_fit_coverage_errors():
    ests = _synthetic(1.5, 1.0, n=20_000)
    with pytest.raises(CoverageError):
        threshold_fit([e for e in ests if e.s > 1.9], 1.0)
    with pytest.raises(CoverageError):
        threshold_fit([e for e in ests if e.s < 1.0], 1.0)
    with pytest.raises(ValidationError):
        threshold_fit(ests[::3], 1.0)


def test_theory_curve_phase_transition():
    assert theory_curve(3, 0.4) == pytest.approx(3.2)
    assert theory_curve(2, 0.0) == 2.0 and theory_curve(2, 1.0) == 2.5
    assert theory_curve(1, 1.0) == 1.5


def test_small_spectrum_run_shapes():
    conf = SpectrumConfig(n_samples=5000, radii=tuple(2.0**m for m in range(4, 11)),
                          n_seeds=2, level=8)
    curve = spectrum_curve(1, [0.5, 1.0], conf)
    assert curve.s_star.shape == (2,) and np.all(np.diff(curve.s_star) >= 0)
    assert curve.per_seed.shape == (2, 2)
    table = spectrum_table(curve)
    assert table.names[:3] == ["k", "theta", "s_star"] and len(table.rows) == 3


def test_ball_containing_everything_has_unit_mass():
    sh = make_sheet([3], 10)
    assert ball_mass(sh, [512], 10.0) == pytest.approx(1.0, abs=2e-3)
    sh2 = make_sheet([3, 4], 6)
    assert ball_mass(sh2, [32, 32], 20.0) == pytest.approx(1.0, abs=0.05)


def test_frostman_line_and_resolution():
    line = AdditiveSheet((BrownianPath.from_values(np.linspace(0, 1, 2**12 + 1)),))
    r = frostman_probe(line, [2.0**m for m in range(-8, -2)], centers=8)
    assert r.exponent == pytest.approx(1.0, abs=0.05)
    with pytest.raises(ResolutionError):
        frostman_probe(line, [2.0**-12, 2.0**-11], centers=4)
    r = frostman_probe(line, [2.0**m for m in range(-13, -3)], centers=4)
    assert r.excluded == [2.0**-13, 2.0**-12, 2.0**-11]


def test_frostman_estimator_brownian():
    est = FrostmanEstimator().fit([make_sheet([s], 16) for s in (1, 2)])
    assert 1.2 < est.exponent_ < 1.8
