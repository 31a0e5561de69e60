import asyncio

import numpy as np
import pytest

from stabaaa.core.errors import DataValidationError, DegenerateDataError
from stabaaa.services.backends import SdpSettings
from stabaaa.services.barycentric import BarycentricModel, DescriptorRealization
from stabaaa.services.datamodel import FrequencyDataset
from stabaaa.services.pipeline import (
    FitRequest,
    FitResult,
    compare_algorithms,
    interpolation_spot_check,
    model_order,
    rebuild_stability_sdp,
    run_algorithm,
    seeded_rng,
)
from stabaaa.services.stabaaa import PoleResidueModel

from .conftest import first_order_unstable, sampled


@pytest.mark.parametrize(
    "kwargs",
    [{"algorithm": "rkfit"}, {"refit_mode": "mirror"}, {"max_iter": 0}, {"theta": 2.0}, {"eps": 0.0}],
    ids=["algorithm", "refit", "max-iter", "theta", "eps"],
)
def test_invalid_requests(kwargs):
    with pytest.raises(DataValidationError):
        FitRequest(**kwargs)


@pytest.mark.parametrize(
    "algorithm, kind",
    [
        ("aaa", BarycentricModel),
        ("stabaaa", BarycentricModel),
        ("loewner", DescriptorRealization),
        ("truncate-refit", PoleResidueModel),
    ],
)
def test_every_algorithm_fits_stable_data(algorithm, kind, stable_ds):
    result = run_algorithm(stable_ds, FitRequest(algorithm=algorithm, eps=1e-6))
    assert isinstance(result.model, kind)
    assert result.met_tolerance
    assert result.stable
    assert result.metrics.e_inf <= 1e-6
    summary = result.summary()
    assert summary["algorithm"] == algorithm and summary["status"] == "ok"
    assert summary["k"] == model_order(result.model)


def test_stabaaa_diagnostics_are_attached(noisy_unstable_ds):
    result = run_algorithm(noisy_unstable_ds, FitRequest(algorithm="stabaaa", eps=0.05, m_max=0))
    assert result.stable
    assert result.diagnostics["sdp_calls"] == 1
    assert result.poles.report is not None


def test_compare_keeps_failures_in_place(freqs):
    ds = sampled(first_order_unstable, freqs)
    results = asyncio.run(compare_algorithms(ds, FitRequest(eps=1e-8), ["aaa", "truncate-refit"]))
    assert isinstance(results[0], FitResult) and results[0].algorithm == "aaa"
    assert isinstance(results[1], DegenerateDataError)


def test_seed_comes_from_the_environment(monkeypatch):
    monkeypatch.setenv("STABAAA_SEED", "7")
    assert seeded_rng().integers(1000) == np.random.default_rng(7).integers(1000)
    monkeypatch.setenv("STABAAA_SEED", "seven")
    with pytest.raises(DataValidationError):
        seeded_rng()


def test_spot_check(random_model, rng):
    assert interpolation_spot_check(random_model, rng) == 0.0
    assert interpolation_spot_check(BarycentricModel([], [], [], 1.0), rng) == 0.0


def test_rebuilt_program_matches_the_fit(noisy_unstable_ds):
    result = run_algorithm(noisy_unstable_ds, FitRequest(algorithm="aaa", eps=0.05))
    program = rebuild_stability_sdp(result.model, noisy_unstable_ds, SdpSettings())
    assert program.dim == 2 * result.model.k


def test_rebuild_needs_matching_samples(random_model, stable_ds):
    with pytest.raises(DataValidationError):
        rebuild_stability_sdp(random_model, stable_ds)
    with pytest.raises(DataValidationError):
        rebuild_stability_sdp(BarycentricModel([], [], [], 1.0), stable_ds)


def test_run_on_constant_data():
    ds = FrequencyDataset([1.0, 2.0, 3.0, 4.0], [1.0, 1.0, 1.0, 1.0])
    result = run_algorithm(ds, FitRequest(algorithm="aaa"))
    assert result.k == 0 and result.stable and result.met_tolerance
