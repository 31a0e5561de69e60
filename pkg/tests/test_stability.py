import numpy as np
import pytest
from numpy.testing import assert_allclose

from stabaaa.core.errors import ConditioningError, DataValidationError
from stabaaa.services.barycentric import BarycentricModel
from stabaaa.services.stability import (
    aspr_gain_sweep,
    build_denominator_realization,
    classify_stability,
    transform_denominator,
    verify_spr,
)


@pytest.fixture
def stable_toy():
    """(s − 1)/(s + 1)."""
    return BarycentricModel([1.0], [1j], [1 - 1j])


@pytest.fixture
def unstable_toy():
    """Single real pole at s = 1."""
    return BarycentricModel([1.0], [1j], [1 + 1j])


def test_stable_model_report(stable_toy):
    report = classify_stability(stable_toy)
    assert report.stable
    assert report.margin == pytest.approx(-1.0)
    assert report.unstable_poles.size == 0
    assert report.characterization == "iff"
    assert report.cb == pytest.approx(2.0)
    assert report.cb_sign == 1


def test_unstable_model_report(unstable_toy):
    report = classify_stability(unstable_toy)
    assert not report.stable
    assert_allclose(report.unstable_poles, [1.0], atol=1e-10)
    payload = report.to_dict()
    assert payload["stable"] is False
    assert payload["margin"] == pytest.approx(1.0)
    assert payload["unstable_poles"] == [[pytest.approx(1.0), pytest.approx(0.0, abs=1e-10)]]


def test_stability_follows_the_weights_not_the_values(unstable_toy):
    # the denominator zeros depend on the weights alone
    other_values = BarycentricModel(unstable_toy.support, [5.0 - 2j], unstable_toy.weights)
    assert classify_stability(other_values).margin == pytest.approx(classify_stability(unstable_toy).margin)


def test_transformed_denominator_keeps_the_transfer_function(random_model, rng):
    den = build_denominator_realization(random_model)
    M = rng.standard_normal((12, 2 * random_model.k))
    td = transform_denominator(den, M, random_model.real_weights)

    # the spectra are purely imaginary; rounding decides their real parts
    expected = np.linalg.eigvals(den.A)
    actual = np.linalg.eigvals(td.A_t)
    scale = max(1.0, float(np.max(np.abs(expected))))
    assert_allclose(np.sort(actual.imag), np.sort(expected.imag), atol=1e-9 * scale)
    assert np.max(np.abs(actual.real)) < 1e-9 * scale
    assert_allclose(td.transform_output(random_model.real_weights), td.xbar, atol=1e-12)
    assert_allclose(td.restore_output(td.xbar), random_model.real_weights, atol=1e-12)
    assert_allclose(td.T @ td.B_t, den.B, atol=1e-12)

    s = 1j * np.array([0.3, 1.7, 4.0]) + 0.5
    transformed = np.array([td.xbar @ np.linalg.solve(p * np.eye(den.order) - td.A_t, td.B_t) for p in s])
    assert_allclose(transformed, den.transfer(s), rtol=1e-9)


def test_singular_quasi_loewner_matrix_is_rejected(stable_toy):
    den = build_denominator_realization(stable_toy)
    with pytest.raises(ConditioningError):
        transform_denominator(den, np.zeros((4, 2)), stable_toy.real_weights)
    with pytest.raises(ConditioningError):
        transform_denominator(den, np.ones((1, 2)), stable_toy.real_weights)
    with pytest.raises(DataValidationError):
        transform_denominator(den, np.eye(4), stable_toy.real_weights)


def test_spr_certificate_under_unit_feedback(stable_toy):
    den = build_denominator_realization(stable_toy)
    certificate = verify_spr(den.A, den.B, den.C, g=1.0)
    assert certificate is not None
    assert certificate.p_min_eig > 0
    assert certificate.kyp_max_eig < 0
    assert certificate.equality_residual < 1e-8


def test_spr_fails_without_positive_cb(stable_toy):
    den = build_denominator_realization(stable_toy)
    assert verify_spr(den.A, den.B, -den.C, g=1.0) is None


def test_spr_fails_for_a_lightly_damped_loop(stable_toy):
    # closed loop (2s + 2)/(s² + 2gs + 1 + 2g) has negative real part at high frequency for g < 1/2
    den = build_denominator_realization(stable_toy)
    assert verify_spr(den.A, den.B, den.C, g=0.1) is None


def test_gain_sweep_picks_the_first_working_gain(stable_toy):
    certificate = aspr_gain_sweep(build_denominator_realization(stable_toy))
    assert certificate is not None
    assert certificate.g == pytest.approx(1.0)
    assert set(certificate.to_dict()) == {"g", "margin", "kyp_max_eig", "p_min_eig", "equality_residual"}


def test_gain_sweep_on_a_negative_cb_denominator():
    den = build_denominator_realization(BarycentricModel([1.0], [1.0], [-1.0 + 0.5j]))
    assert aspr_gain_sweep(den) is None
