import io
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from stabaaa.core.errors import CsvParseError, DataValidationError, DegenerateDataError
from stabaaa.services.datamodel import (
    FrequencyDataset,
    NormalizationRecord,
    apply_normalization,
    denormalize,
    error_metrics,
    load_dataset,
    load_frequencies,
    normalize,
    sample_errors,
    write_dataset,
)


def test_load_dataset_converts_hz_to_rad_s():
    ds = load_dataset(b"freq,re,im\n1,1.0,0.0\n2,0.5,-0.5\n", freq_unit="hz")
    assert_allclose(ds.freqs, [2 * math.pi, 4 * math.pi])
    assert ds.values[1] == 0.5 - 0.5j


def test_load_dataset_sorts_unordered_rows():
    ds = load_dataset(b"freq,re,im\n3,3,0\n1,1,0\n2,2,0\n", freq_unit="rad_s")
    assert_array_equal(ds.freqs, [1.0, 2.0, 3.0])
    assert_array_equal(ds.values.real, [1.0, 2.0, 3.0])


def test_bad_header_reports_line_one():
    with pytest.raises(CsvParseError) as info:
        load_dataset(b"f,real,imag\n1,1,0\n")
    assert info.value.line == 1


def test_malformed_row_reports_its_line():
    with pytest.raises(CsvParseError) as info:
        load_dataset(b"freq,re,im\n1,1,0\n2,abc,0\n")
    assert info.value.line == 3


@pytest.mark.parametrize(
    "text",
    [
        b"freq,re,im\n0,1,0\n1,1,0\n",
        b"freq,re,im\n1,1,0\n1,2,0\n",
        b"freq,re,im\n1,1,0\n",
    ],
    ids=["zero-frequency", "duplicate", "single-sample"],
)
def test_invalid_datasets_are_rejected(text):
    with pytest.raises(DataValidationError):
        load_dataset(text, freq_unit="rad_s")


def test_write_then_load_is_exact(stable_ds):
    buffer = io.StringIO()
    write_dataset(stable_ds, buffer, freq_unit="rad_s")
    again = load_dataset(buffer.getvalue().encode(), freq_unit="rad_s")
    assert_array_equal(again.freqs, stable_ds.freqs)
    assert_array_equal(again.values, stable_ds.values)


def test_normalize_scales_to_unit_magnitude_and_two_pi(stable_ds):
    normalized, record = normalize(stable_ds)
    assert np.max(np.abs(normalized.values)) == pytest.approx(1.0)
    assert normalized.freqs[-1] == pytest.approx(2 * math.pi)
    restored = denormalize(normalized, record)
    assert_allclose(restored.freqs, stable_ds.freqs, rtol=1e-15)
    assert_allclose(restored.values, stable_ds.values, rtol=1e-15)


def test_identity_record_leaves_data_unchanged(stable_ds):
    same = apply_normalization(stable_ds, NormalizationRecord.identity())
    assert_array_equal(same.freqs, stable_ds.freqs)
    assert_array_equal(same.values, stable_ds.values)


def test_normalize_rejects_all_zero_data():
    with pytest.raises(DegenerateDataError):
        normalize(FrequencyDataset([1.0, 2.0], [0.0, 0.0]))


def test_error_metrics_against_zero_model():
    ds = FrequencyDataset([1.0, 2.0, 3.0, 4.0], [3.0, 4.0j, 0.0, 1.0])
    report = error_metrics(lambda s: np.zeros_like(s), ds)
    assert report.e_inf == 4.0
    assert report.argmax_index == 1
    assert report.e_2 == pytest.approx(math.sqrt(26.0))
    assert report.e_rms == pytest.approx(math.sqrt(26.0) / 2.0)


def test_relative_errors_fall_back_to_absolute_at_zero_samples():
    ds = FrequencyDataset([1.0, 2.0], [2.0, 0.0])
    errors = sample_errors(lambda s: np.ones_like(s), ds, mode="rel")
    assert_allclose(errors, [0.5, 1.0])


def test_unknown_error_mode():
    with pytest.raises(DataValidationError):
        sample_errors(lambda s: s, FrequencyDataset([1.0, 2.0], [1.0, 1.0]), mode="max")


@pytest.mark.parametrize("freqs, values", [([], []), ([1.0], [1.0])], ids=["empty", "single"])
def test_datasets_need_two_samples(freqs, values):
    with pytest.raises(DataValidationError):
        FrequencyDataset(freqs, values)


def test_a_single_row_csv_is_rejected():
    with pytest.raises(DataValidationError):
        load_dataset(b"freq,re,im\n1,1.0,0.0\n", freq_unit="hz")


def test_errors_on_selected_samples():
    ds = FrequencyDataset([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert_allclose(sample_errors(lambda s: np.ones_like(s), ds, indices=[2]), [2.0])
    assert_allclose(sample_errors(lambda s: np.ones_like(s), ds, indices=[2, 0]), [2.0, 0.0])
    assert sample_errors(lambda s: np.ones_like(s), ds, indices=[]).size == 0
    with pytest.raises(DataValidationError):
        ds.subset([2])


def test_load_frequencies_reads_first_column():
    freqs = load_frequencies(b"freq,re,im\n1,0,0\n10,0,0\n", freq_unit="rad_s")
    assert_array_equal(freqs, [1.0, 10.0])
    with pytest.raises(CsvParseError):
        load_frequencies(b"omega\n1\n")
