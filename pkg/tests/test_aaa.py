import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from stabaaa.core.errors import ConditioningError, DataValidationError, SaturationError
from stabaaa.services.aaa import AaaSettings, AaaState, aaa_fit, run_aaa, select_support, solve_weights
from stabaaa.services.barycentric import poles
from stabaaa.services.datamodel import FrequencyDataset
from stabaaa.services.loewner import real_quasi_loewner

from .conftest import third_order


def test_constant_data_need_no_support_points():
    fit = aaa_fit(FrequencyDataset([1.0, 2.0, 3.0], [2.0, 2.0, 2.0]), eps=1e-9)
    assert fit.converged
    assert fit.k == 0
    assert fit.model.constant == 2.0
    assert fit.loewner_real is None


def test_third_order_system_is_recovered(stable_ds):
    fit = aaa_fit(stable_ds, eps=1e-8)
    assert fit.converged
    assert fit.k <= 4
    assert fit.final_max_error <= 1e-8
    assert_allclose(fit.model(stable_ds.s), stable_ds.values, atol=1e-7)


def test_support_points_are_interpolated_and_partition_the_samples(unstable_pair_ds):
    fit = aaa_fit(unstable_pair_ds, eps=1e-6)
    support = np.asarray(fit.state.support_indices)
    assert_array_equal(np.sort(np.r_[support, fit.test_indices]), np.arange(unstable_pair_ds.count))
    assert_allclose(fit.model.support, unstable_pair_ds.freqs[support])
    assert_array_equal(fit.model(1j * fit.model.support), unstable_pair_ds.values[support])


def test_unstable_poles_are_reproduced_without_stability_constraints(unstable_pair_ds):
    fit = aaa_fit(unstable_pair_ds, eps=1e-9)
    p = poles(fit.model).finite_poles
    for expected in (-1.0, 0.2 + 1.98997487j):
        assert np.min(np.abs(p - expected)) < 1e-5


def test_history_and_trace(stable_ds):
    seen = []
    fit = aaa_fit(stable_ds, eps=1e-8, trace=seen.append)
    assert [record.iteration for record in seen] == list(range(1, fit.state.iteration + 1))
    assert seen == fit.state.history
    assert seen[0].chosen_freq == stable_ds.freqs[fit.state.support_indices[0]]
    assert set(seen[0].to_dict()) == {"iter", "chosen_freq", "max_err", "sigma_min"}


def test_iteration_cap_returns_the_best_model(unstable_pair_ds, caplog):
    fit = aaa_fit(unstable_pair_ds, eps=1e-12, max_iter=1)
    assert not fit.converged
    assert fit.k == 1
    assert "iteration cap" in caplog.text


def test_iteration_cap_picks_the_smallest_test_error(noisy_unstable_ds):
    fit = aaa_fit(noisy_unstable_ds, eps=1e-12, max_iter=3)
    assert not fit.converged
    assert fit.k >= 1
    assert fit.final_max_error == min(record.max_error for record in fit.state.history)


def test_default_cap_is_a_quarter_of_the_samples():
    assert AaaSettings().iteration_cap(40) == 10
    assert AaaSettings().iteration_cap(3) == 1
    assert AaaSettings(max_iter=7).iteration_cap(40) == 7


def test_resumed_fit_matches_a_fresh_fit(unstable_pair_ds):
    loose = run_aaa(unstable_pair_ds, AaaSettings(eps=1e-2))
    resumed = run_aaa(unstable_pair_ds, AaaSettings(eps=1e-9), state=loose.state)
    fresh = run_aaa(unstable_pair_ds, AaaSettings(eps=1e-9))
    assert resumed.state.support_indices == fresh.state.support_indices
    assert_allclose(resumed.x_opt, fresh.x_opt)
    # the loose state is not mutated by resuming
    assert len(loose.state.support_indices) == loose.k


def test_ties_go_to_the_lowest_frequency():
    ds = FrequencyDataset([1.0, 2.0, 3.0, 4.0], [0.0, 2.0, 0.0, 2.0])
    assert select_support(AaaState.initial(ds), ds) == 0


def test_select_support_on_an_empty_test_set():
    ds = FrequencyDataset([1.0, 2.0], [1.0, 2.0])
    state = AaaState.initial(ds)
    state.test_indices = np.zeros(0, dtype=int)
    with pytest.raises(SaturationError):
        select_support(state, ds)


def test_two_samples_leave_a_single_test_sample():
    fit = aaa_fit(FrequencyDataset([1.0, 2.0], [1.0, 2.0]), eps=1e-12)
    assert fit.k == 1
    assert fit.test_indices.size == 1


def test_saturation_when_the_test_set_runs_out():
    freqs = np.array([1.0, 2.0, 3.0])
    ds = FrequencyDataset(freqs, third_order(1j * freqs))
    with pytest.raises(SaturationError):
        run_aaa(ds, AaaSettings(eps=1e-14, max_iter=2))


def test_weights_are_unit_norm_with_positive_real_sum(rng):
    values = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    M = real_quasi_loewner([1.0, 4.0], values[:2], [0.5, 2.0, 3.0], values[2:])
    x = solve_weights(M)
    assert np.linalg.norm(x) == pytest.approx(1.0)
    assert np.sum(x[0::2]) > 0


def test_wide_quasi_loewner_matrix_is_rejected(stable_ds):
    M = real_quasi_loewner(stable_ds.freqs[:3], stable_ds.values[:3], stable_ds.freqs[3:4], stable_ds.values[3:4])
    with pytest.raises(ConditioningError) as err:
        solve_weights(M)
    assert "x_opt" not in err.value.diagnostics


def test_rank_deficient_matrix_reports_its_minimizer():
    # constant data make every entry vanish
    freqs = np.arange(1.0, 7.0)
    M = real_quasi_loewner(freqs[:2], np.ones(2), freqs[2:], np.ones(4))
    with pytest.raises(ConditioningError) as err:
        solve_weights(M)
    assert err.value.diagnostics["x_opt"].shape == (4,)


@pytest.mark.parametrize(
    "kwargs", [{"eps": 0.0}, {"max_iter": 0}, {"error_mode": "max"}], ids=["eps", "max_iter", "mode"]
)
def test_invalid_settings(kwargs):
    with pytest.raises(DataValidationError):
        AaaSettings(**kwargs)


def test_a_single_sample_is_rejected():
    with pytest.raises(DataValidationError):
        aaa_fit(FrequencyDataset([1.0], [1.0]))
