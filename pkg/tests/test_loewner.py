import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from stabaaa.core.errors import DataValidationError, DegenerateDataError
from stabaaa.services.barycentric import BarycentricModel, evaluate, evaluate_denominator, evaluate_numerator
from stabaaa.services.datamodel import FrequencyDataset
from stabaaa.services.loewner import (
    dump_loewner_csv,
    loewner_fit,
    loewner_pair,
    loewner_rom,
    partition_alternating,
    real_quasi_loewner,
)


@pytest.fixture
def pair(stable_ds):
    left, right = partition_alternating(stable_ds)
    return loewner_pair(
        stable_ds.freqs[left], stable_ds.values[left], stable_ds.freqs[right], stable_ds.values[right]
    )


def test_alternating_partition_drops_unmatched_left_point():
    ds = FrequencyDataset(np.arange(1.0, 8.0), np.ones(7))
    left, right = partition_alternating(ds)
    assert_array_equal(left, [0, 2, 4])
    assert_array_equal(right, [1, 3, 5])


def test_pair_satisfies_sylvester_identities(pair):
    mu, eta = 1j * pair.left_freqs, 1j * pair.right_freqs
    ones_left, ones_right = np.ones(mu.size), np.ones(eta.size)
    assert_allclose(pair.Ls - pair.L * eta[None, :], np.outer(pair.V, ones_right), atol=1e-12)
    assert_allclose(pair.Ls - mu[:, None] * pair.L, np.outer(ones_left, pair.W), atol=1e-12)


def test_pair_rejects_shared_points():
    with pytest.raises(DataValidationError):
        loewner_pair([1.0, 2.0], [1, 1], [2.0, 3.0], [1, 1])


def test_loewner_model_recovers_a_third_order_system(stable_ds):
    rom = loewner_fit(stable_ds)
    assert rom.order == 3
    assert_allclose(rom.transfer(stable_ds.s), stable_ds.values, atol=1e-8)


def test_loewner_model_of_constant_data_is_degenerate():
    ds = FrequencyDataset(np.arange(1.0, 9.0), np.full(8, 2.0))
    with pytest.raises(DegenerateDataError):
        loewner_fit(ds)


def test_unequal_left_and_right_sets_are_rejected(stable_ds):
    skewed = loewner_pair(stable_ds.freqs[:3], stable_ds.values[:3], stable_ds.freqs[3:5], stable_ds.values[3:5])
    with pytest.raises(DataValidationError):
        loewner_rom(skewed)


def test_quasi_loewner_matches_linearized_error(stable_ds, rng):
    support = np.array([2, 11, 25])
    test = np.setdiff1d(np.arange(stable_ds.count), support)
    lam, h = stable_ds.freqs[support], stable_ds.values[support]
    zeta, H = stable_ds.freqs[test], stable_ds.values[test]
    M = real_quasi_loewner(lam, h, zeta, H)
    assert M.shape == (2 * test.size, 2 * support.size)

    x = rng.standard_normal(2 * support.size)
    w = x[0::2] + 1j * x[1::2]
    s = 1j * zeta[:, None]
    E = ((H[:, None] - h) * w / (s - 1j * lam) + (H[:, None] - h.conj()) * w.conj() / (s + 1j * lam)).sum(axis=1)
    assert_allclose(M.M @ x, np.r_[E.real, E.imag], atol=1e-12)


def test_quasi_loewner_product_is_numerator_minus_data_times_denominator(stable_ds, rng):
    support = np.array([0, 7])
    test = np.setdiff1d(np.arange(stable_ds.count), support)
    x = rng.standard_normal(4)
    model = BarycentricModel.from_real_weights(stable_ds.freqs[support], stable_ds.values[support], x)
    M = real_quasi_loewner(
        stable_ds.freqs[support], stable_ds.values[support], stable_ds.freqs[test], stable_ds.values[test]
    )
    s = stable_ds.s[test]
    E = stable_ds.values[test] * evaluate_denominator(model, s) - evaluate_numerator(model, s)
    assert_allclose(M.M @ x, np.r_[E.real, E.imag], atol=1e-12)
    assert_allclose(evaluate(model, s), evaluate_numerator(model, s) / evaluate_denominator(model, s))


def test_quasi_loewner_rejects_shared_points():
    with pytest.raises(DataValidationError):
        real_quasi_loewner([1.0], [1.0], [1.0, 2.0], [1.0, 1.0])


def test_dump_writes_real_and_imaginary_parts(pair, tmp_path):
    dump_loewner_csv(pair, tmp_path / "loewner")
    names = sorted(p.name for p in (tmp_path / "loewner").iterdir())
    assert names == ["L_im.csv", "L_re.csv", "Ls_im.csv", "Ls_re.csv"]
    assert_allclose(np.loadtxt(tmp_path / "loewner" / "L_re.csv", delimiter=","), pair.L.real)
